//! Training loop: rollout collection over a set of environments,
//! clipped-surrogate updates, learning-curve rows, and full-state
//! checkpoints that resume bit-exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvSnapshot, SignEnv};
use crate::error::{Error, Result};
use crate::reward::RewardBreakdown;
use crate::rl::buffer::{AdvantageMode, RolloutBuffer, StepEnd};
use crate::rl::net::Activation;
use crate::rl::ppo::{Batch, Ppo};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

// Stream offsets keep the trainer rngs off the env streams (0..num_envs).
const STREAM_INIT: u64 = u64::MAX - 2;
const STREAM_SAMPLE: u64 = u64::MAX - 1;
const STREAM_UPDATE: u64 = u64::MAX;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Rollout length per environment, not global.
    pub n_steps: usize,
    /// Minibatch size for the update epochs.
    pub batch_size: usize,
    pub n_epochs: usize,
    pub gamma: f64,
    pub clip_ratio: f64,
    /// Only read in `gae` mode.
    pub gae_lambda: f64,
    pub advantage_mode: AdvantageMode,
    pub normalize_advantages: bool,
    pub total_steps: usize,
    pub num_envs: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    /// Fixed per-action log standard deviation; not learned.
    pub log_std: f64,
    pub seed: u64,
    /// Environment steps between checkpoints, rounded up to a whole
    /// number of updates. `None` checkpoints only at the end.
    pub checkpoint_every: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 3e-6,
            n_steps: 512,
            batch_size: 128,
            n_epochs: 5,
            gamma: 0.95,
            clip_ratio: 0.2,
            gae_lambda: 0.95,
            advantage_mode: AdvantageMode::MonteCarlo,
            normalize_advantages: true,
            total_steps: 500_000,
            num_envs: 8,
            hidden: vec![256, 512, 256],
            activation: Activation::Relu,
            log_std: -3.0,
            seed: 0,
            checkpoint_every: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::validation("learning_rate must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::validation("gamma must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::validation("gae_lambda must lie in [0, 1]"));
        }
        if self.clip_ratio <= 0.0 {
            return Err(Error::validation("clip_ratio must be positive"));
        }
        if self.n_steps == 0 || self.num_envs == 0 || self.n_epochs == 0 {
            return Err(Error::validation("n_steps, num_envs, n_epochs must be positive"));
        }
        if self.batch_size == 0 || self.batch_size > self.n_steps * self.num_envs {
            return Err(Error::validation(format!(
                "batch_size {} must lie in 1..={} (n_steps x num_envs)",
                self.batch_size,
                self.n_steps * self.num_envs
            )));
        }
        if self.total_steps == 0 {
            return Err(Error::validation("total_steps must be positive"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::validation("hidden layer sizes must be positive"));
        }
        if !self.log_std.is_finite() {
            return Err(Error::validation("log_std must be finite"));
        }
        Ok(())
    }
}

/// One learning-curve row, appended after every update.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    /// Environment steps collected so far.
    pub step: usize,
    pub reward_mean: f64,
    pub reward_std: f64,
    pub surrogate_loss: f64,
    pub value_loss: f64,
    pub kl: f64,
    pub clip_fraction: f64,
}

/// Everything needed to resume training exactly where it stopped.
#[derive(Serialize, Deserialize, Clone)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub config: TrainConfig,
    /// `model_hash:clip_hash` of the training environments.
    pub fingerprint: String,
    pub step: usize,
    pub ppo: Ppo,
    pub sample_rng: ChaCha8Rng,
    pub update_rng: ChaCha8Rng,
    pub envs: Vec<EnvSnapshot>,
    pub curve: Vec<CurveRow>,
    /// Running return of the episode in flight, per env.
    pub episode_acc: Vec<f64>,
}

pub struct Trainer {
    pub config: TrainConfig,
    pub ppo: Ppo,
    envs: Vec<SignEnv>,
    sample_rng: ChaCha8Rng,
    update_rng: ChaCha8Rng,
    step: usize,
    curve: Vec<CurveRow>,
    episode_acc: Vec<f64>,
}

impl Trainer {
    /// `make_env(seed, stream)` must build identical environments for
    /// identical arguments; `stream` is the env index.
    pub fn new(
        config: TrainConfig,
        make_env: impl Fn(u64, u64) -> Result<SignEnv>,
    ) -> Result<Self> {
        config.validate()?;
        let envs = Self::build_envs(&config, &make_env)?;
        let obs_dim = envs[0].obs_dim();
        let act_dim = envs[0].action_dim();
        let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
        init_rng.set_stream(STREAM_INIT);
        let ppo = Ppo::new(
            obs_dim,
            act_dim,
            &config.hidden,
            config.activation,
            config.log_std,
            config.learning_rate,
            &mut init_rng,
        )?;
        let mut sample_rng = ChaCha8Rng::seed_from_u64(config.seed);
        sample_rng.set_stream(STREAM_SAMPLE);
        let mut update_rng = ChaCha8Rng::seed_from_u64(config.seed);
        update_rng.set_stream(STREAM_UPDATE);
        let n = envs.len();
        Ok(Trainer {
            config,
            ppo,
            envs,
            sample_rng,
            update_rng,
            step: 0,
            curve: Vec::new(),
            episode_acc: vec![0.0; n],
        })
    }

    /// Rebuilds a trainer from a checkpoint. The factory must produce
    /// the same environments the checkpoint was trained on.
    pub fn from_checkpoint(
        ckpt: Checkpoint,
        make_env: impl Fn(u64, u64) -> Result<SignEnv>,
    ) -> Result<Self> {
        if ckpt.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::CheckpointMismatch(format!(
                "checkpoint schema v{}, this build reads v{CHECKPOINT_SCHEMA_VERSION}",
                ckpt.schema_version
            )));
        }
        ckpt.config.validate()?;
        if ckpt.envs.len() != ckpt.config.num_envs {
            return Err(Error::CheckpointMismatch(format!(
                "checkpoint holds {} env snapshots for num_envs {}",
                ckpt.envs.len(),
                ckpt.config.num_envs
            )));
        }
        let mut envs = Self::build_envs(&ckpt.config, &make_env)?;
        if envs[0].fingerprint() != ckpt.fingerprint {
            return Err(Error::CheckpointMismatch(format!(
                "checkpoint was trained against {}, factory built {}",
                ckpt.fingerprint,
                envs[0].fingerprint()
            )));
        }
        for (env, snap) in envs.iter_mut().zip(ckpt.envs.into_iter()) {
            env.restore(snap)?;
        }
        Ok(Trainer {
            config: ckpt.config,
            ppo: ckpt.ppo,
            envs,
            sample_rng: ckpt.sample_rng,
            update_rng: ckpt.update_rng,
            step: ckpt.step,
            curve: ckpt.curve,
            episode_acc: ckpt.episode_acc,
        })
    }

    fn build_envs(
        config: &TrainConfig,
        make_env: &impl Fn(u64, u64) -> Result<SignEnv>,
    ) -> Result<Vec<SignEnv>> {
        let envs: Vec<SignEnv> = (0..config.num_envs)
            .map(|i| make_env(config.seed, i as u64))
            .collect::<Result<_>>()?;
        let fp = envs[0].fingerprint();
        for e in &envs {
            if e.fingerprint() != fp {
                return Err(Error::contract("environments disagree on model/clip"));
            }
        }
        Ok(envs)
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn curve(&self) -> &[CurveRow] {
        &self.curve
    }

    pub fn fingerprint(&self) -> String {
        self.envs[0].fingerprint()
    }

    pub fn finished(&self) -> bool {
        self.step >= self.config.total_steps
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            config: self.config.clone(),
            fingerprint: self.fingerprint(),
            step: self.step,
            ppo: self.ppo.clone(),
            sample_rng: self.sample_rng.clone(),
            update_rng: self.update_rng.clone(),
            envs: self.envs.iter().map(|e| e.snapshot()).collect(),
            curve: self.curve.clone(),
            episode_acc: self.episode_acc.clone(),
        }
    }

    /// One collect-and-update iteration; returns the curve row it
    /// appended.
    pub fn iterate(&mut self) -> Result<CurveRow> {
        let t_len = self.config.n_steps;
        let mut buf = RolloutBuffer::new(self.envs.len(), t_len);
        let mut completed: Vec<f64> = Vec::new();
        let mut step_rewards: Vec<f64> = Vec::with_capacity(self.envs.len() * t_len);
        for (e, env) in self.envs.iter_mut().enumerate() {
            let mut obs = env.observe().0;
            for t in 0..t_len {
                let (action, logp) = self.ppo.sample_action(&obs, &mut self.sample_rng);
                if action.iter().any(|a| !a.is_finite()) {
                    return Err(Error::Diverged {
                        context: format!("policy action for env {e} at trainer step {}", self.step + t),
                    });
                }
                let value = self.ppo.predict_value(&obs);
                let out = env.step(&action)?;
                if !out.reward.is_finite() {
                    return Err(Error::Diverged {
                        context: format!("reward from env {e} at trainer step {}", self.step + t),
                    });
                }
                step_rewards.push(out.reward);
                self.episode_acc[e] += out.reward;
                // Every episode end here is a time limit, so the return
                // keeps flowing through the post-step value; a rollout
                // boundary mid-episode bootstraps the same way.
                let end = if out.done {
                    completed.push(self.episode_acc[e]);
                    self.episode_acc[e] = 0.0;
                    StepEnd::Truncate { value: self.ppo.predict_value(&out.observation.0) }
                } else if t == t_len - 1 {
                    StepEnd::Truncate { value: self.ppo.predict_value(&out.observation.0) }
                } else {
                    StepEnd::Continue
                };
                let next_obs = if out.done { env.reset().0 } else { out.observation.0 };
                let prev_obs = std::mem::replace(&mut obs, next_obs);
                buf.push(prev_obs, action, out.reward, value, logp, end);
            }
        }
        self.step += self.envs.len() * t_len;

        let (returns, advantages) = buf.returns_and_advantages(
            self.config.advantage_mode,
            self.config.gamma,
            self.config.gae_lambda,
            self.config.normalize_advantages,
        )?;
        let batch = Batch {
            obs: &buf.obs,
            actions: &buf.actions,
            logp_old: &buf.logps,
            advantages: &advantages,
            returns: &returns,
        };
        let stats = self.ppo.update(
            &batch,
            self.config.clip_ratio,
            self.config.n_epochs,
            self.config.batch_size,
            &mut self.update_rng,
        );
        if !stats.surrogate_loss.is_finite() || !stats.value_loss.is_finite() {
            return Err(Error::Diverged {
                context: format!("losses after the update at step {}", self.step),
            });
        }

        // Curve rewards are completed-episode returns; if the rollout
        // completed none, the per-step mean scaled to episode length
        // stands in.
        let (reward_mean, reward_std) = if completed.is_empty() {
            let scale = self.envs[0].max_steps() as f64;
            let m = crate::math::mean(&step_rewards) * scale;
            (m, 0.0)
        } else {
            let m = crate::math::mean(&completed);
            (m, crate::math::std_dev(&completed, m))
        };
        let row = CurveRow {
            step: self.step,
            reward_mean,
            reward_std,
            surrogate_loss: stats.surrogate_loss,
            value_loss: stats.value_loss,
            kl: stats.approx_kl,
            clip_fraction: stats.clip_fraction,
        };
        self.curve.push(row);
        Ok(row)
    }

    /// Runs to `total_steps`, invoking `after_update` on each new curve
    /// row (checkpoint writing hooks in here).
    pub fn run(
        &mut self,
        mut after_update: impl FnMut(&Trainer, &CurveRow) -> Result<()>,
    ) -> Result<()> {
        while !self.finished() {
            let row = self.iterate()?;
            after_update(self, &row)?;
        }
        Ok(())
    }
}

/// One evaluation step: the reward channels observed after applying the
/// mean action.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct EvalRow {
    pub step: usize,
    pub breakdown: RewardBreakdown,
}

/// Post-step character configuration, for external visualizers.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct PoseRow {
    pub step: usize,
    pub root_position: [f64; 3],
    /// w, x, y, z.
    pub root_rotation: [f64; 4],
    pub q: Vec<f64>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct EvalReport {
    pub steps: usize,
    /// Sum of per-step rewards over the whole run.
    pub total_reward: f64,
    pub reward_mean: f64,
    pub rows: Vec<EvalRow>,
    pub poses: Vec<PoseRow>,
}

/// Deterministic policy evaluation: mean actions, `steps` env steps,
/// resetting whenever an episode ends.
pub fn evaluate(ppo: &Ppo, env: &mut SignEnv, steps: usize) -> Result<EvalReport> {
    let mut rows = Vec::with_capacity(steps);
    let mut poses = Vec::with_capacity(steps);
    let mut total = 0.0;
    let mut obs = env.reset().0;
    for k in 0..steps {
        let action = ppo.act_mean(&obs);
        let out = env.step(&action)?;
        total += out.reward;
        rows.push(EvalRow { step: k, breakdown: out.breakdown });
        let (rp, rr) = env.root_pose_at(env.tick());
        poses.push(PoseRow {
            step: k,
            root_position: [rp.x, rp.y, rp.z],
            root_rotation: [rr.w, rr.i, rr.j, rr.k],
            q: env.state().q.clone(),
        });
        obs = if out.done { env.reset().0 } else { out.observation.0 };
    }
    Ok(EvalReport {
        steps,
        total_reward: total,
        reward_mean: if steps > 0 { total / steps as f64 } else { 0.0 },
        rows,
        poses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EpisodeConfig;
    use crate::synth;
    use std::sync::Arc;

    fn toy_factory(seed: u64, stream: u64) -> Result<SignEnv> {
        let model = Arc::new(synth::toy_model());
        let clip = Arc::new(synth::toy_clip(&model, crate::env::CONTROL_RATE));
        SignEnv::new(
            model,
            clip,
            synth::toy_reward_config(),
            EpisodeConfig::default(),
            seed,
            stream,
        )
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            learning_rate: 3e-4,
            n_steps: 24,
            batch_size: 16,
            n_epochs: 2,
            num_envs: 2,
            hidden: vec![16],
            activation: Activation::Tanh,
            log_std: -1.5,
            total_steps: 24 * 2 * 3,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn curve_has_one_row_per_update() {
        let mut t = Trainer::new(small_config(), toy_factory).unwrap();
        t.run(|_, _| Ok(())).unwrap();
        assert_eq!(t.curve().len(), 3);
        assert_eq!(t.step_count(), 144);
        for (i, row) in t.curve().iter().enumerate() {
            assert_eq!(row.step, (i + 1) * 48);
            assert!(row.reward_mean.is_finite());
            assert!(row.kl.is_finite());
        }
    }

    #[test]
    fn identical_seeds_give_identical_curves() {
        let mut a = Trainer::new(small_config(), toy_factory).unwrap();
        let mut b = Trainer::new(small_config(), toy_factory).unwrap();
        a.run(|_, _| Ok(())).unwrap();
        b.run(|_, _| Ok(())).unwrap();
        assert_eq!(a.curve(), b.curve());
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = Trainer::new(small_config(), toy_factory).unwrap();
        let mut b =
            Trainer::new(TrainConfig { seed: 8, ..small_config() }, toy_factory).unwrap();
        a.run(|_, _| Ok(())).unwrap();
        b.run(|_, _| Ok(())).unwrap();
        assert_ne!(a.curve(), b.curve());
    }

    #[test]
    fn checkpoint_resume_matches_uninterrupted_run() {
        let cfg = TrainConfig { total_steps: 48 * 5, ..small_config() };
        let mut full = Trainer::new(cfg.clone(), toy_factory).unwrap();
        full.run(|_, _| Ok(())).unwrap();

        let mut half = Trainer::new(cfg, toy_factory).unwrap();
        half.iterate().unwrap();
        half.iterate().unwrap();
        let json = serde_json::to_string(&half.checkpoint()).unwrap();
        let ckpt: Checkpoint = serde_json::from_str(&json).unwrap();
        let mut resumed = Trainer::from_checkpoint(ckpt, toy_factory).unwrap();
        resumed.run(|_, _| Ok(())).unwrap();

        assert_eq!(full.curve().len(), resumed.curve().len());
        for (a, b) in full.curve().iter().zip(resumed.curve()) {
            assert_eq!(a, b, "resumed curve row differs");
        }
        assert_eq!(full.ppo.policy.params, resumed.ppo.policy.params);
        assert_eq!(full.ppo.value.params, resumed.ppo.value.params);
    }

    #[test]
    fn checkpoint_fingerprint_is_enforced() {
        let mut t = Trainer::new(small_config(), toy_factory).unwrap();
        t.iterate().unwrap();
        let ckpt = t.checkpoint();
        let other = |seed: u64, stream: u64| -> Result<SignEnv> {
            let model = Arc::new(synth::signer_model());
            let clip = Arc::new(synth::sign_clip(&model, "x", 1));
            let cfg = crate::reward::RewardConfig::for_model(&model);
            SignEnv::new(model, clip, cfg, EpisodeConfig::default(), seed, stream)
        };
        assert!(matches!(
            Trainer::from_checkpoint(ckpt, other),
            Err(Error::CheckpointMismatch(_))
        ));
    }

    #[test]
    fn evaluate_is_deterministic_and_reports_breakdowns() {
        let t = Trainer::new(small_config(), toy_factory).unwrap();
        let ep = EpisodeConfig { rsi: false, ..Default::default() };
        let mk = |s| {
            let model = Arc::new(synth::toy_model());
            let clip = Arc::new(synth::toy_clip(&model, crate::env::CONTROL_RATE));
            SignEnv::new(model, clip, synth::toy_reward_config(), ep.clone(), s, 0).unwrap()
        };
        let mut e1 = mk(3);
        let mut e2 = mk(3);
        let a = evaluate(&t.ppo, &mut e1, 50).unwrap();
        let b = evaluate(&t.ppo, &mut e2, 50).unwrap();
        assert_eq!(a.total_reward, b.total_reward);
        assert_eq!(a.rows.len(), 50);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.breakdown.total, y.breakdown.total);
        }
        assert!((a.reward_mean - a.total_reward / 50.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let bad = TrainConfig { batch_size: 1000, n_steps: 8, num_envs: 2, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { gamma: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { learning_rate: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { hidden: vec![], ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn default_config_matches_documented_values() {
        let d = TrainConfig::default();
        assert_eq!(d.learning_rate, 3e-6);
        assert_eq!(d.n_steps, 512);
        assert_eq!(d.batch_size, 128);
        assert_eq!(d.n_epochs, 5);
        assert_eq!(d.gamma, 0.95);
        assert_eq!(d.clip_ratio, 0.2);
        assert_eq!(d.advantage_mode, AdvantageMode::MonteCarlo);
        assert_eq!(d.num_envs, 8);
        assert_eq!(d.hidden, vec![256, 512, 256]);
        assert_eq!(d.log_std, -3.0);
        // Config files may spell the advantage mode either way.
        let c: TrainConfig =
            serde_json::from_str(r#"{"advantage_mode":"paper"}"#).unwrap();
        assert_eq!(c.advantage_mode, AdvantageMode::MonteCarlo);
        let c: TrainConfig = serde_json::from_str(r#"{"advantage_mode":"gae"}"#).unwrap();
        assert_eq!(c.advantage_mode, AdvantageMode::Gae);
    }
}
