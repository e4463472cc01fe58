//! A miniature hand-scale sweep on the toy arm.
//!
//!     cargo run --release --example sweep_grid
//!
//! The bundled sweep spec (assets/configs/sweep_hand_scales.json) runs
//! the study's 4x4 grid at 250k steps per trial; this example shrinks
//! it to a 2x2 grid with a tiny budget so it finishes in seconds.

use std::sync::Arc;

use signmimic::config::{apply_sweep_axis, RunConfig, SweepSpec, SweepStrategy};
use signmimic::env::SignEnv;
use signmimic::rl::Trainer;
use signmimic::Result;

fn main() -> Result<()> {
    let cfg_path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/configs/toy.json");
    let cfg = RunConfig::load(cfg_path)?;
    let model = cfg.load_model()?;
    let clip = cfg.load_clips(&model)?[0].clone();
    let base_reward = cfg.reward_for(&model)?;

    let spec = SweepSpec {
        schema_version: 1,
        axes: [
            ("k_vel_body".to_string(), vec![0.1, 0.005]),
            ("learning_rate".to_string(), vec![3e-4, 3e-5]),
        ]
        .into_iter()
        .collect(),
        strategy: SweepStrategy::Grid,
        budget_steps: Some(10_240),
    };
    let budget = spec.budget_steps.unwrap();

    let mut results = Vec::new();
    for (i, assignment) in spec.trials(cfg.seeds[0]).into_iter().enumerate() {
        let mut train = cfg.train.clone();
        let mut reward = base_reward.clone();
        for (name, value) in &assignment {
            apply_sweep_axis(&mut reward, &mut train, name, *value)?;
        }
        train.total_steps = budget;
        train.seed = cfg.seeds[0];
        let mut trainer = Trainer::new(train, |s, stream| {
            SignEnv::new(
                model.clone(),
                clip.clone(),
                reward.clone(),
                cfg.episode.clone(),
                s,
                stream,
            )
        })?;
        trainer.run(|_, _| Ok(()))?;
        let last = trainer.curve().last().expect("at least one update");
        results.push((i, assignment, last.reward_mean));
    }

    results.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
    println!("{:<5} {:<6} {:<24} {:>16}", "rank", "trial", "assignment", "reward/episode");
    for (rank, (i, assignment, score)) in results.iter().enumerate() {
        let a: Vec<String> =
            assignment.iter().map(|(n, v)| format!("{n}={v}")).collect();
        println!("{:<5} {:<6} {:<24} {:>16.3}", rank + 1, i, a.join(" "), score);
    }
    Ok(())
}
