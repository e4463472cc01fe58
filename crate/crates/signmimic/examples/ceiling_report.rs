//! Reward ceilings for every bundled clip, both modes.
//!
//!     cargo run --release --example ceiling_report
//!
//! Kinematic mode pins the state to the reference (exactly 1.0 per
//! step, the analytic bound). pd_tracked commands the reference poses
//! through the PD loop, which is what an ideal policy of this
//! architecture could do; the gap to 2000 is tracking lag.

use std::sync::Arc;

use signmimic::motion::MotionClip;
use signmimic::retarget::{ceiling_batch, CeilingMode, DEFAULT_CEILING_STEPS};
use signmimic::reward::builtin_factor_sets;
use signmimic::reward::RewardConfig;
use signmimic::skeleton::SkeletonModel;
use signmimic::Result;

fn main() -> Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");
    let model = Arc::new(SkeletonModel::load(format!("{root}/models/signer.json"))?);
    let stock = RewardConfig::for_model(&model);
    let tuned = builtin_factor_sets()
        .into_iter()
        .find(|s| s.name == "run3")
        .expect("run3 is builtin")
        .to_reward_config(&stock);

    let mut clips = Vec::new();
    for label in ["above", "snow", "father", "mother", "yes", "tuning"] {
        clips.push(Arc::new(MotionClip::load(format!("{root}/clips/{label}.json"), &model)?));
    }

    println!(
        "{:<10} {:<11} {:>12} {:>9}",
        "clip", "mode", "total", "mean"
    );
    for mode in [CeilingMode::Kinematic, CeilingMode::PdTracked] {
        let reports =
            ceiling_batch(&model, &clips, &tuned, mode, DEFAULT_CEILING_STEPS, 1)?;
        for rep in reports {
            println!(
                "{:<10} {:<11} {:>12.3} {:>9.5}",
                rep.clip,
                rep.mode.to_string(),
                rep.total_reward,
                rep.reward_mean
            );
        }
    }

    // The same bound depends on the scales: the tuning motion's jittery
    // fingers annihilate the stock product.
    let tuning = clips.last().unwrap().clone();
    let stock_rep = ceiling_batch(
        &model,
        &[tuning],
        &stock,
        CeilingMode::PdTracked,
        DEFAULT_CEILING_STEPS,
        1,
    )?;
    println!(
        "\ntuning under stock scales: pd_tracked mean {:.3e}/step (annihilated by k_vh = 0.1)",
        stock_rep[0].reward_mean
    );
    Ok(())
}
