//! Acceptance gate: nine criteria, one pass/fail line each, run in
//! order. The binary exits nonzero if any criterion fails. Budgets and
//! tolerances are pinned as constants next to each criterion.
//!
//! The long pole is criterion 8 (two 500k-step training runs); expect
//! the whole gate to take around an hour on one core.

use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use signmimic::config::RunConfig;
use signmimic::dynamics::{step as dyn_step, ControlTarget, DynState};
use signmimic::env::{SignEnv, SIM_RATE};
use signmimic::retarget::{ceiling, CeilingMode, DEFAULT_CEILING_STEPS};
use signmimic::reward::{builtin_factor_sets, compose, RewardBreakdown, RewardConfig, RewardErrors};
use signmimic::rl::ppo::{surrogate_loss_and_grad, value_loss_and_grad};
use signmimic::rl::{
    evaluate, Activation, AdvantageMode, Batch, Mlp, RolloutBuffer, StepEnd, Trainer,
};
use signmimic::skeleton::SkeletonModel;

type Check = fn() -> Result<String, String>;

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets")
}

fn main() {
    // Budgets in seconds, per criterion, from the gate's contract.
    let criteria: [(&str, f64, Check); 9] = [
        ("reward algebra", 10.0, c1_reward_algebra),
        ("kinematic ceiling", 60.0, c2_kinematic_ceiling),
        ("pd-tracked ceiling", 300.0, c3_pd_tracked_ceiling),
        ("gain refinement", 30.0, c4_gain_refinement),
        ("gradient correctness", 60.0, c5_gradient_correctness),
        ("advantage oracle", 10.0, c6_advantage_oracle),
        ("toy-scale learning", 1800.0, c7_toy_learning),
        ("scaled sign imitation", 7200.0, c8_sign_imitation),
        ("reproducibility", 300.0, c9_reproducibility),
    ];

    println!("acceptance: {} criteria", criteria.len());
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed().as_secs_f64();
        let result = match outcome {
            Ok(Ok(detail)) if elapsed <= *budget => Ok(detail),
            Ok(Ok(detail)) => {
                Err(format!("passed but over budget ({elapsed:.1}s > {budget}s): {detail}"))
            }
            Ok(Err(reason)) => Err(reason),
            Err(payload) => Err(format!("panic: {}", panic_text(payload.as_ref()))),
        };
        match result {
            Ok(detail) => {
                println!("[{}] PASS {:>7.1}s  {}: {}", i + 1, elapsed, name, detail);
            }
            Err(reason) => {
                failures += 1;
                println!("[{}] FAIL {:>7.1}s  {}: {}", i + 1, elapsed, name, reason);
            }
        }
        let _ = std::io::stdout().flush();
    }
    println!("acceptance: {}/{} passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

fn panic_text(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

// ---------------------------------------------------------------- 1

const C1_CASES: usize = 10_000;
const C1_SPOT_TOL: f64 = 1e-12;

/// Randomized algebra of `compose`: factor range, per-channel
/// monotonicity in the error, annihilation of the product by any dead
/// channel, leniency of smaller scales, plus one exact spot value.
fn c1_reward_algebra() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    let channel_factor = |b: &RewardBreakdown, c: usize| match c {
        0 => b.r_pose_body,
        1 => b.r_pose_hand,
        2 => b.r_vel_body,
        3 => b.r_vel_hand,
        4 => b.r_end_effector,
        _ => b.r_root,
    };
    fn channel_scale(cfg: &mut RewardConfig, c: usize) -> &mut f64 {
        match c {
            0 => &mut cfg.k_pose_body,
            1 => &mut cfg.k_pose_hand,
            2 => &mut cfg.k_vel_body,
            3 => &mut cfg.k_vel_hand,
            4 => &mut cfg.k_end_effector,
            _ => &mut cfg.k_root,
        }
    }
    fn channel_error(e: &mut RewardErrors, c: usize) -> &mut f64 {
        match c {
            0 => &mut e.pose_body,
            1 => &mut e.pose_hand,
            2 => &mut e.vel_body,
            3 => &mut e.vel_hand,
            4 => &mut e.end_effector,
            _ => &mut e.root,
        }
    }

    for case in 0..C1_CASES {
        let mut cfg = RewardConfig::default();
        let mut err = RewardErrors::default();
        for c in 0..6 {
            *channel_scale(&mut cfg, c) = rng.gen_range(0.0..50.0);
            *channel_error(&mut err, c) = rng.gen_range(0.0..10.0);
        }
        let b = compose(&cfg, &err).map_err(|e| format!("case {case}: {e}"))?;

        // Range, and the product never exceeds any factor.
        let mut min_factor = f64::INFINITY;
        for c in 0..6 {
            let f = channel_factor(&b, c);
            if !(f > 0.0 && f <= 1.0) {
                return Err(format!("case {case}: factor {c} = {f} outside (0, 1]"));
            }
            min_factor = min_factor.min(f);
        }
        if !(b.total >= 0.0 && b.total <= min_factor * (1.0 + 1e-12)) {
            return Err(format!("case {case}: total {} vs min factor {min_factor}", b.total));
        }

        // Monotonicity: raising one error never raises its factor or
        // the product; with a real scale the drop is strict.
        let c = rng.gen_range(0..6usize);
        let mut worse = err;
        *channel_error(&mut worse, c) += rng.gen_range(0.01..1.0);
        let b2 = compose(&cfg, &worse).map_err(|e| format!("case {case}: {e}"))?;
        let (f1, f2) = (channel_factor(&b, c), channel_factor(&b2, c));
        if f2 > f1 || b2.total > b.total * (1.0 + 1e-12) {
            return Err(format!("case {case}: error up, reward up ({f1} -> {f2})"));
        }
        if *channel_scale(&mut cfg, c) >= 0.01 && f1 > 1e-200 && f2 >= f1 {
            return Err(format!("case {case}: channel {c} not strictly monotone"));
        }

        // Scaling leniency: a smaller scale forgives the same error more.
        let shared = rng.gen_range(0.001..10.0);
        let k_soft = rng.gen_range(0.0..25.0);
        let k_hard = k_soft + rng.gen_range(0.01..25.0);
        let mut cfg_soft = RewardConfig::default();
        let mut cfg_hard = RewardConfig::default();
        let mut e_one = RewardErrors::default();
        *channel_scale(&mut cfg_soft, c) = k_soft;
        *channel_scale(&mut cfg_hard, c) = k_hard;
        for other in 0..6 {
            if other != c {
                *channel_scale(&mut cfg_soft, other) = 0.0;
                *channel_scale(&mut cfg_hard, other) = 0.0;
            }
        }
        *channel_error(&mut e_one, c) = shared;
        let soft = compose(&cfg_soft, &e_one).map_err(|e| format!("case {case}: {e}"))?;
        let hard = compose(&cfg_hard, &e_one).map_err(|e| format!("case {case}: {e}"))?;
        if !(soft.total > hard.total) {
            return Err(format!(
                "case {case}: k {k_soft} not more lenient than {k_hard} at e {shared}"
            ));
        }

        // Annihilation: one dead channel kills the product exactly.
        if case % 10 == 0 {
            let mut dead = err;
            *channel_error(&mut dead, c) = 2000.0;
            *channel_scale(&mut cfg, c) = rng.gen_range(1.0..10.0);
            let b3 = compose(&cfg, &dead).map_err(|e| format!("case {case}: {e}"))?;
            if channel_factor(&b3, c) != 0.0 || b3.total != 0.0 {
                return Err(format!("case {case}: dead channel left total {}", b3.total));
            }
        }
    }

    // Spot value: k = 2, e = ln2 / 2 on one channel, rest inert.
    let mut cfg = RewardConfig::default();
    cfg.k_pose_body = 2.0;
    let err = RewardErrors { pose_body: 2.0f64.ln() / 2.0, ..RewardErrors::default() };
    let spot = compose(&cfg, &err).map_err(|e| e.to_string())?;
    let dev = (spot.r_pose_body - 0.5).abs();
    if dev > C1_SPOT_TOL {
        return Err(format!("spot compose(2, ln2/2) = {} off by {dev:.2e}", spot.r_pose_body));
    }
    Ok(format!("{C1_CASES} cases, spot value off by {dev:.1e}"))
}

// ---------------------------------------------------------------- 2

const C2_STEPS: usize = 2000;
const C2_TOL: f64 = 1e-6;

/// Kinematic replay of every bundled clip scores the analytic bound.
fn c2_kinematic_ceiling() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (env, label) in bundled_envs().map_err(|e| e)? {
        let mut env = env;
        let report = ceiling(&mut env, CeilingMode::Kinematic, C2_STEPS)
            .map_err(|e| format!("{label}: {e}"))?;
        let dev = (report.total_reward - C2_STEPS as f64).abs();
        if dev > C2_TOL {
            return Err(format!("{label}: total {} deviates by {dev:.2e}", report.total_reward));
        }
        worst = worst.max(dev);
        count += 1;
    }
    Ok(format!("{count} clips at {C2_STEPS}.0 +/- {C2_TOL:.0e} (worst dev {worst:.1e})"))
}

/// One env per bundled clip, built through the bundled run configs so
/// reward scales and joint splits match what training would use.
fn bundled_envs() -> Result<Vec<(SignEnv, String)>, String> {
    let mut envs = Vec::new();
    for cfg_name in ["above", "snow", "father", "mother", "yes", "tuning_final", "toy"] {
        let cfg = RunConfig::load(assets().join("configs").join(format!("{cfg_name}.json")))
            .map_err(|e| format!("{cfg_name}: {e}"))?;
        let model = cfg.load_model().map_err(|e| format!("{cfg_name}: {e}"))?;
        let clips = cfg.load_clips(&model).map_err(|e| format!("{cfg_name}: {e}"))?;
        let reward = cfg.reward_for(&model).map_err(|e| format!("{cfg_name}: {e}"))?;
        for clip in clips {
            let label = clip.label.clone();
            let env = SignEnv::new(
                model.clone(),
                clip,
                reward.clone(),
                cfg.episode.clone(),
                0,
                0,
            )
            .map_err(|e| format!("{label}: {e}"))?;
            envs.push((env, label));
        }
    }
    Ok(envs)
}

// ---------------------------------------------------------------- 3

const C3_STEPS: usize = 2000;
const C3_FLOOR: f64 = 1900.0;

/// PD-tracked replay of the five bundled sign clips, under each clip's
/// bundled reward scales, stays within 5% of the kinematic bound.
fn c3_pd_tracked_ceiling() -> Result<String, String> {
    let mut lowest = f64::INFINITY;
    let mut lines = Vec::new();
    for cfg_name in ["above", "snow", "father", "mother", "yes"] {
        let cfg = RunConfig::load(assets().join("configs").join(format!("{cfg_name}.json")))
            .map_err(|e| format!("{cfg_name}: {e}"))?;
        let model = cfg.load_model().map_err(|e| e.to_string())?;
        let clip = cfg.load_clips(&model).map_err(|e| e.to_string())?.remove(0);
        let reward = cfg.reward_for(&model).map_err(|e| e.to_string())?;
        let mut env = SignEnv::new(model, clip, reward, cfg.episode.clone(), 0, 0)
            .map_err(|e| format!("{cfg_name}: {e}"))?;
        let report = ceiling(&mut env, CeilingMode::PdTracked, C3_STEPS)
            .map_err(|e| format!("{cfg_name}: {e}"))?;
        if report.total_reward < C3_FLOOR {
            return Err(format!(
                "'{cfg_name}' scored {:.1} < {C3_FLOOR} over {C3_STEPS} steps",
                report.total_reward
            ));
        }
        lowest = lowest.min(report.total_reward);
        lines.push(format!("{cfg_name} {:.1}", report.total_reward));
    }
    Ok(format!("5 clips >= {C3_FLOOR}/{C3_STEPS} ({})", lines.join(", ")))
}

// ---------------------------------------------------------------- 4

const C4_KD_FAST: f64 = 6.0;
const C4_KD_SLOW: f64 = 30.0;

/// Step-target regression behind the gain refinement: the bundled elbow
/// damping reaches 90% of a step faster than the stiffer alternative.
fn c4_gain_refinement() -> Result<String, String> {
    let base = SkeletonModel::load(assets().join("models/signer.json")).map_err(|e| e.to_string())?;
    let joint = base.joint_index("right_elbow").ok_or("no right_elbow joint")?;
    let dof = base.dof_base[joint].ok_or("elbow has no dof")?;

    let t90_for = |kd: f64| -> Result<f64, String> {
        let mut spec = base.spec().clone();
        // Gains are validated as left/right mirrors; change both sides.
        for j in spec.joints.iter_mut() {
            if j.name.ends_with("_elbow") {
                j.kd = Some(kd);
            }
        }
        let model = SkeletonModel::from_spec(spec).map_err(|e| e.to_string())?;
        let target = 0.5;
        let mut goal = ControlTarget::hold(vec![0.0; model.total_dofs]);
        goal.q_des[dof] = target;
        let mut state = DynState::rest(&model);
        let dt = 1.0 / SIM_RATE;
        for i in 0..(2.0 * SIM_RATE) as usize {
            state = dyn_step(&model, &state, &goal, dt).map_err(|e| e.to_string())?;
            if state.q[dof] >= 0.9 * target {
                return Ok((i + 1) as f64 * dt);
            }
        }
        Err(format!("kd {kd}: elbow never reached 90% of the step"))
    };

    let fast = t90_for(C4_KD_FAST)?;
    let slow = t90_for(C4_KD_SLOW)?;
    if !(fast < slow) {
        return Err(format!("t90(kd={C4_KD_FAST}) = {fast:.4}s not below t90(kd={C4_KD_SLOW}) = {slow:.4}s"));
    }
    Ok(format!("elbow t90 {fast:.4}s at kd {C4_KD_FAST} < {slow:.4}s at kd {C4_KD_SLOW}"))
}

// ---------------------------------------------------------------- 5

const C5_POINTS: usize = 100;
const C5_REL_TOL: f64 = 1e-4;
const C5_FD_H: f64 = 1e-6;

/// Analytic policy and value gradients against central differences at
/// random parameter points of a 4-8-2 policy (4-8-1 value head).
fn c5_gradient_correctness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6D4D);
    let log_std = -0.5;
    let clip = 0.5;
    let n = 20;
    let mut max_rel: f64 = 0.0;

    for point in 0..C5_POINTS {
        // logp_old comes from a nearby reference net so ratios differ
        // from 1 but stay inside the clip band, away from its kinks.
        let (policy, value, obs, actions, logp_old, advantages, returns) = loop {
            let reference = Mlp::new(&[4, 8, 2], Activation::Tanh, 0.5, &mut rng)
                .map_err(|e| e.to_string())?;
            let mut policy = reference.clone();
            for p in policy.params.iter_mut() {
                *p += rng.gen_range(-0.01..0.01);
            }
            let value =
                Mlp::new(&[4, 8, 1], Activation::Tanh, 1.0, &mut rng).map_err(|e| e.to_string())?;
            let std = (log_std as f64).exp();
            let mut obs = Vec::new();
            let mut actions = Vec::new();
            let mut logp_old = Vec::new();
            let mut advantages = Vec::new();
            let mut returns = Vec::new();
            for _ in 0..n {
                let o: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mean = reference.forward(&o);
                let a: Vec<f64> = mean
                    .iter()
                    .map(|m| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        m + std * z
                    })
                    .collect();
                logp_old.push(signmimic::rl::ppo::gaussian_logp(&mean, log_std, &a));
                obs.push(o);
                actions.push(a);
                advantages.push(rng.gen_range(-1.5..1.5));
                returns.push(rng.gen_range(-1.0..1.0));
            }
            let in_band = obs.iter().enumerate().all(|(i, o)| {
                let lp =
                    signmimic::rl::ppo::gaussian_logp(&policy.forward(o), log_std, &actions[i]);
                let r = (lp - logp_old[i]).exp();
                r > 0.6 && r < 1.4
            });
            if in_band {
                break (policy, value, obs, actions, logp_old, advantages, returns);
            }
        };
        let batch = Batch {
            obs: &obs,
            actions: &actions,
            logp_old: &logp_old,
            advantages: &advantages,
            returns: &returns,
        };
        let idx: Vec<usize> = (0..n).collect();

        let mut grad = vec![0.0; policy.params.len()];
        surrogate_loss_and_grad(&policy, log_std, &batch, &idx, clip, &mut grad);
        let mut scratch = vec![0.0; grad.len()];
        for k in 0..policy.params.len() {
            let mut plus = policy.clone();
            plus.params[k] += C5_FD_H;
            let mut minus = policy.clone();
            minus.params[k] -= C5_FD_H;
            scratch.iter_mut().for_each(|g| *g = 0.0);
            let lp = surrogate_loss_and_grad(&plus, log_std, &batch, &idx, clip, &mut scratch)
                .surrogate_loss;
            scratch.iter_mut().for_each(|g| *g = 0.0);
            let lm = surrogate_loss_and_grad(&minus, log_std, &batch, &idx, clip, &mut scratch)
                .surrogate_loss;
            let fd = (lp - lm) / (2.0 * C5_FD_H);
            let rel = (fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-8);
            max_rel = max_rel.max(rel);
            if rel >= C5_REL_TOL {
                return Err(format!(
                    "point {point} policy param {k}: analytic {} vs fd {fd} (rel {rel:.2e})",
                    grad[k]
                ));
            }
        }

        let mut vgrad = vec![0.0; value.params.len()];
        value_loss_and_grad(&value, &batch, &idx, &mut vgrad);
        let mut vscratch = vec![0.0; vgrad.len()];
        for k in 0..value.params.len() {
            let mut plus = value.clone();
            plus.params[k] += C5_FD_H;
            let mut minus = value.clone();
            minus.params[k] -= C5_FD_H;
            let lp = value_loss_and_grad(&plus, &batch, &idx, &mut vscratch);
            let lm = value_loss_and_grad(&minus, &batch, &idx, &mut vscratch);
            let fd = (lp - lm) / (2.0 * C5_FD_H);
            let rel = (fd - vgrad[k]).abs() / fd.abs().max(vgrad[k].abs()).max(1e-8);
            max_rel = max_rel.max(rel);
            if rel >= C5_REL_TOL {
                return Err(format!(
                    "point {point} value param {k}: analytic {} vs fd {fd} (rel {rel:.2e})",
                    vgrad[k]
                ));
            }
        }
    }
    Ok(format!("{C5_POINTS} points, max rel err {max_rel:.1e} < {C5_REL_TOL:.0e}"))
}

// ---------------------------------------------------------------- 6

const C6_BUFFERS: usize = 1000;
const C6_TOL: f64 = 1e-12;

/// Vectorized returns/advantages against a brute-force double loop on
/// random 10-step buffers with terminations and truncations inside.
fn c6_advantage_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAD7A);
    let t_len = 10;
    let mut worst: f64 = 0.0;
    for case in 0..C6_BUFFERS {
        let num_envs = rng.gen_range(1..=3);
        let gamma = rng.gen_range(0.5..1.0);
        let lambda = rng.gen_range(0.5..1.0);
        let buf = random_buffer(&mut rng, num_envs, t_len);
        let (oracle_ret, oracle_mc, oracle_gae) = oracle(&buf, gamma, lambda);

        for (mode, oracle_adv) in
            [(AdvantageMode::MonteCarlo, &oracle_mc), (AdvantageMode::Gae, &oracle_gae)]
        {
            let (ret, adv) = buf
                .returns_and_advantages(mode, gamma, lambda, false)
                .map_err(|e| format!("case {case}: {e}"))?;
            for i in 0..buf.len() {
                let dr = (ret[i] - oracle_ret[i]).abs();
                let da = (adv[i] - oracle_adv[i]).abs();
                worst = worst.max(dr).max(da);
                if dr > C6_TOL || da > C6_TOL {
                    return Err(format!(
                        "case {case} {mode:?} step {i}: return dev {dr:.2e}, advantage dev {da:.2e}"
                    ));
                }
            }
        }
    }
    Ok(format!("{C6_BUFFERS} buffers, both modes, worst dev {worst:.1e}"))
}

fn random_buffer(rng: &mut ChaCha8Rng, num_envs: usize, t_len: usize) -> RolloutBuffer {
    let mut buf = RolloutBuffer::new(num_envs, t_len);
    for _ in 0..num_envs {
        for t in 0..t_len {
            let closing = t == t_len - 1;
            let end = match rng.gen_range(0..10) {
                0 => StepEnd::Terminate,
                1 | 2 => StepEnd::Truncate { value: rng.gen_range(-2.0..2.0) },
                _ if closing => StepEnd::Truncate { value: rng.gen_range(-2.0..2.0) },
                _ => StepEnd::Continue,
            };
            buf.push(
                vec![0.0],
                vec![0.0],
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-2.0..2.0),
                0.0,
                end,
            );
        }
    }
    buf
}

/// Brute-force targets: discounted-sum returns, Monte Carlo advantages,
/// and GAE, each as an explicit inner loop from every start step.
fn oracle(buf: &RolloutBuffer, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let t_len = buf.steps_per_env;
    let mut returns = vec![0.0; buf.len()];
    let mut mc = vec![0.0; buf.len()];
    let mut gae = vec![0.0; buf.len()];
    for e in 0..buf.num_envs {
        let base = e * t_len;
        for t0 in 0..t_len {
            let mut acc = 0.0;
            let mut disc = 1.0;
            for t in t0..t_len {
                let i = base + t;
                acc += disc * buf.rewards[i];
                match buf.ends[i] {
                    StepEnd::Continue => disc *= gamma,
                    StepEnd::Terminate => break,
                    StepEnd::Truncate { value } => {
                        acc += disc * gamma * value;
                        break;
                    }
                }
            }
            returns[base + t0] = acc;
            mc[base + t0] = acc - buf.values[base + t0];

            let mut adv = 0.0;
            let mut weight = 1.0;
            for t in t0..t_len {
                let i = base + t;
                let (next_v, boundary) = match buf.ends[i] {
                    StepEnd::Continue => (buf.values[i + 1], false),
                    StepEnd::Terminate => (0.0, true),
                    StepEnd::Truncate { value } => (value, true),
                };
                adv += weight * (buf.rewards[i] + gamma * next_v - buf.values[i]);
                if boundary {
                    break;
                }
                weight *= gamma * lambda;
            }
            gae[base + t0] = adv;
        }
    }
    (returns, mc, gae)
}

// ---------------------------------------------------------------- 7

const C7_FRACTION: f64 = 0.9;
const C7_MIN_PASSES: usize = 8;

/// PPO on the bundled 2-dof arm config reaches 90% of the arm's own
/// pd-tracked ceiling, per seed, judged by a deterministic evaluation.
fn c7_toy_learning() -> Result<String, String> {
    let cfg = RunConfig::load(assets().join("configs/toy.json")).map_err(|e| e.to_string())?;
    let model = cfg.load_model().map_err(|e| e.to_string())?;
    let clip = cfg.load_clips(&model).map_err(|e| e.to_string())?.remove(0);
    let reward = cfg.reward_for(&model).map_err(|e| e.to_string())?;
    if cfg.train.total_steps > 200_000 {
        return Err(format!("toy config trains {} steps, over the 200k budget", cfg.train.total_steps));
    }
    if cfg.seeds.len() != 10 {
        return Err(format!("toy config lists {} seeds, want 10", cfg.seeds.len()));
    }

    let mut bound_env =
        SignEnv::new(model.clone(), clip.clone(), reward.clone(), cfg.episode.clone(), 0, 0)
            .map_err(|e| e.to_string())?;
    let bound = ceiling(&mut bound_env, CeilingMode::PdTracked, DEFAULT_CEILING_STEPS)
        .map_err(|e| e.to_string())?
        .reward_mean;
    let mark = C7_FRACTION * bound;

    let mut passes = 0;
    let mut means = Vec::new();
    for &seed in &cfg.seeds {
        let mut tc = cfg.train.clone();
        tc.seed = seed;
        let (m, c, r, ep) = (model.clone(), clip.clone(), reward.clone(), cfg.episode.clone());
        let mut trainer = Trainer::new(tc, move |s, stream| {
            SignEnv::new(m.clone(), c.clone(), r.clone(), ep.clone(), s, stream)
        })
        .map_err(|e| format!("seed {seed}: {e}"))?;
        trainer.run(|_, _| Ok(())).map_err(|e| format!("seed {seed}: {e}"))?;

        let mut episode = cfg.episode.clone();
        episode.rsi = false;
        let mut eval_env = SignEnv::new(model.clone(), clip.clone(), reward.clone(), episode, 0, 0)
            .map_err(|e| e.to_string())?;
        let report = evaluate(&trainer.ppo, &mut eval_env, cfg.eval_steps)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        if report.reward_mean >= mark {
            passes += 1;
        }
        means.push(format!("{:.3}", report.reward_mean));
    }
    if passes < C7_MIN_PASSES {
        return Err(format!(
            "{passes}/10 seeds reached {mark:.4}/step (bound {bound:.4}); means {}",
            means.join(" ")
        ));
    }
    Ok(format!("{passes}/10 seeds >= {C7_FRACTION} x ceiling ({mark:.4}/step)"))
}

// ---------------------------------------------------------------- 8

const C8_EVAL_STEPS: usize = 2000;

/// Full-scale qualitative check: 500k steps on one bundled sign clip
/// with the tuned hand scales beats the same run under the stock scales,
/// where the hand velocity channel annihilates the product reward.
fn c8_sign_imitation() -> Result<String, String> {
    let cfg = RunConfig::load(assets().join("configs/above.json")).map_err(|e| e.to_string())?;
    let model = cfg.load_model().map_err(|e| e.to_string())?;
    let clip = cfg.load_clips(&model).map_err(|e| e.to_string())?.remove(0);
    let tuned = cfg.reward_for(&model).map_err(|e| e.to_string())?;
    let sets = builtin_factor_sets();
    let stock = sets.iter().find(|s| s.name == "default").ok_or("no default factor set")?;
    let stock = stock.to_reward_config(&tuned);
    if cfg.train.total_steps != 500_000 {
        return Err(format!("bundled config trains {} steps, want 500000", cfg.train.total_steps));
    }

    let run = |label: &str, reward: RewardConfig| -> Result<f64, String> {
        let mut tc = cfg.train.clone();
        tc.seed = 1;
        let (m, c, r, ep) = (model.clone(), clip.clone(), reward.clone(), cfg.episode.clone());
        let mut trainer = Trainer::new(tc, move |s, stream| {
            SignEnv::new(m.clone(), c.clone(), r.clone(), ep.clone(), s, stream)
        })
        .map_err(|e| format!("{label}: {e}"))?;
        let mut next_report = 100_000;
        trainer
            .run(|t, row| {
                if t.step_count() >= next_report {
                    eprintln!("  [8] {label}: {} steps, mean {:.4}/step", t.step_count(), row.reward_mean);
                    next_report += 100_000;
                }
                Ok(())
            })
            .map_err(|e| format!("{label}: {e}"))?;
        let mut episode = cfg.episode.clone();
        episode.rsi = false;
        let mut eval_env =
            SignEnv::new(model.clone(), clip.clone(), reward, episode, 0, 0).map_err(|e| e.to_string())?;
        let report = evaluate(&trainer.ppo, &mut eval_env, C8_EVAL_STEPS)
            .map_err(|e| format!("{label}: {e}"))?;
        Ok(report.reward_mean)
    };

    let tuned_mean = run("tuned scales", tuned)?;
    let stock_mean = run("stock scales", stock)?;
    if !(tuned_mean > stock_mean) {
        return Err(format!(
            "tuned scales {tuned_mean:.6}/step not above stock scales {stock_mean:.6}/step"
        ));
    }
    Ok(format!("'above' 500k steps: tuned {tuned_mean:.4}/step > stock {stock_mean:.2e}/step"))
}

// ---------------------------------------------------------------- 9

/// Training through the CLI twice with one config, seed set, and worker
/// count produces byte-identical learning curves.
fn c9_reproducibility() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_signmimic");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let toy_reward = signmimic::synth::toy_reward_config();
    let config = serde_json::json!({
        "schema_version": 1,
        "name": "repro",
        "model": assets().join("models/toy.json"),
        "clips": [assets().join("clips/toy.json")],
        "reward": toy_reward,
        "episode": { "max_steps": null, "rsi": true, "loop_clip": true },
        "train": {
            "learning_rate": 3e-4,
            "n_steps": 64,
            "batch_size": 64,
            "n_epochs": 2,
            "gamma": 0.95,
            "clip_ratio": 0.2,
            "gae_lambda": 0.95,
            "advantage_mode": "monte_carlo",
            "normalize_advantages": true,
            "total_steps": 512,
            "num_envs": 2,
            "hidden": [32, 32],
            "activation": "relu",
            "log_std": -1.5,
            "seed": 0,
            "checkpoint_every": 512
        },
        "eval_steps": 100,
        "seeds": [1, 2]
    });
    let cfg_path = dir.path().join("repro.json");
    std::fs::write(&cfg_path, serde_json::to_vec_pretty(&config).unwrap())
        .map_err(|e| e.to_string())?;

    let mut curves: Vec<Vec<Vec<u8>>> = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("out{run}"));
        let status = std::process::Command::new(bin)
            .args(["--config", cfg_path.to_str().unwrap()])
            .args(["--out", out.to_str().unwrap()])
            .args(["--threads", "2"])
            .arg("train")
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("run {run}: train exited with {status}"));
        }
        let mut per_seed = Vec::new();
        for seed in [1u64, 2] {
            let path = out.join("repro").join(format!("seed_{seed}")).join("curve.csv");
            per_seed.push(std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?);
        }
        curves.push(per_seed);
    }
    for (i, seed) in [1u64, 2].iter().enumerate() {
        if curves[0][i] != curves[1][i] {
            return Err(format!("seed {seed}: curves differ between identical runs"));
        }
        if curves[0][i].is_empty() {
            return Err(format!("seed {seed}: empty curve"));
        }
    }
    Ok(format!("2 runs x 2 seeds, curves byte-identical ({} bytes each)", curves[0][0].len()))
}
