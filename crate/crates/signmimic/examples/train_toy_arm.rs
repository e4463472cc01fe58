//! Trains the 2-DoF toy arm and scores it against its tracking bound.
//!
//!     cargo run --release --example train_toy_arm -- [seeds] [steps]
//!
//! The toy arm is deliberately overdamped, so plain position tracking
//! leaves headroom: a learned policy that leads the reference beats the
//! PD bound. This is the fast end-to-end check of the whole stack.

use std::sync::Arc;
use std::time::Instant;

use signmimic::config::RunConfig;
use signmimic::env::SignEnv;
use signmimic::retarget::{ceiling, CeilingMode, DEFAULT_CEILING_STEPS};
use signmimic::rl::{evaluate, Trainer};
use signmimic::Result;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n_seeds: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let steps_override: Option<usize> = args.get(2).and_then(|s| s.parse().ok());

    let cfg_path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/configs/toy.json");
    let cfg = RunConfig::load(cfg_path)?;
    let model = cfg.load_model()?;
    let clip = cfg.load_clips(&model)?[0].clone();
    let reward_cfg = cfg.reward_for(&model)?;
    let episode = cfg.episode.clone();

    let make_env = |s, stream| {
        SignEnv::new(model.clone(), clip.clone(), reward_cfg.clone(), episode.clone(), s, stream)
    };

    let mut bound_env = make_env(0, 0)?;
    let pd = ceiling(&mut bound_env, CeilingMode::PdTracked, DEFAULT_CEILING_STEPS)?;
    let target = 0.9 * pd.reward_mean;
    println!(
        "pd_tracked bound: {:.4}/step over {} steps; pass mark {:.4}/step",
        pd.reward_mean, pd.steps, target
    );

    let mut passes = 0;
    for seed in cfg.seeds.iter().take(n_seeds) {
        let mut tc = cfg.train.clone();
        tc.seed = *seed;
        if let Some(s) = steps_override {
            tc.total_steps = s;
        }
        let t0 = Instant::now();
        let mut trainer = Trainer::new(tc, make_env)?;
        trainer.run(|_, _| Ok(()))?;
        let mut eval_env = make_env(0, 0)?;
        eval_env.episode.rsi = false;
        let rep = evaluate(&trainer.ppo, &mut eval_env, DEFAULT_CEILING_STEPS)?;
        let ok = rep.reward_mean >= target;
        passes += ok as usize;
        println!(
            "seed {:>2}: {:>7} steps in {:>5.1} s  eval {:.4}/step ({:.0}% of bound)  {}",
            seed,
            trainer.step_count(),
            t0.elapsed().as_secs_f64(),
            rep.reward_mean,
            100.0 * rep.reward_mean / pd.reward_mean,
            if ok { "pass" } else { "miss" }
        );
    }
    println!("{passes}/{n_seeds} seeds reached 90% of the tracking bound");
    Ok(())
}
