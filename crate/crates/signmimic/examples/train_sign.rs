//! Trains one PPO policy on a bundled sign clip.
//!
//!     cargo run --release --example train_sign -- [steps] [seed]
//!
//! Defaults to a short 8192-step probe of the full-scale configuration
//! (the bundled configs run 500k steps). Artifacts land in a temp
//! directory printed at the end.

use std::sync::Arc;
use std::time::Instant;

use signmimic::config::RunConfig;
use signmimic::env::SignEnv;
use signmimic::rl::Trainer;
use signmimic::Result;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let steps: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(8192);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let cfg_path =
        concat!(env!("CARGO_MANIFEST_DIR"), "/assets/configs/above.json");
    let cfg = RunConfig::load(cfg_path)?;
    let model = cfg.load_model()?;
    let clips = cfg.load_clips(&model)?;
    let clip = clips[0].clone();
    let reward_cfg = cfg.reward_for(&model)?;

    let mut tc = cfg.train.clone();
    tc.total_steps = steps;
    tc.seed = seed;
    println!(
        "sign '{}': obs {} dims, net {:?}, {} envs x {} steps/update, lr {}",
        clip.label,
        1 + 13 * model.links.len(),
        tc.hidden,
        tc.num_envs,
        tc.n_steps,
        tc.learning_rate
    );

    let episode = cfg.episode.clone();
    let mut trainer = Trainer::new(tc, |s, stream| {
        SignEnv::new(model.clone(), clip.clone(), reward_cfg.clone(), episode.clone(), s, stream)
    })?;

    let t0 = Instant::now();
    trainer.run(|_, row| {
        let rate = row.step as f64 / t0.elapsed().as_secs_f64();
        println!(
            "{:>8} steps  reward/ep {:>9.3}  kl {:.2e}  clip {:.3}  ({:.0} steps/s)",
            row.step, row.reward_mean, row.kl, row.clip_fraction, rate
        );
        Ok(())
    })?;
    let dt = t0.elapsed();
    println!(
        "{} steps in {:.1} s ({:.0} steps/s); a 500k run at this rate takes {:.0} min",
        trainer.step_count(),
        dt.as_secs_f64(),
        trainer.step_count() as f64 / dt.as_secs_f64(),
        500_000.0 / (trainer.step_count() as f64 / dt.as_secs_f64()) / 60.0
    );
    Ok(())
}
