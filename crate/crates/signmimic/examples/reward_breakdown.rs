//! Shows the multiplicative reward channel by channel.
//!
//!     cargo run --example reward_breakdown
//!
//! A static policy (hold the first reference pose) drifts away from the
//! moving clip; watch the hand velocity channel collapse the product
//! under stock scales while the tuned scales keep it informative.

use std::sync::Arc;

use signmimic::env::SignEnv;
use signmimic::motion::MotionClip;
use signmimic::reward::{builtin_factor_sets, RewardConfig};
use signmimic::skeleton::SkeletonModel;
use signmimic::Result;

fn run(label: &str, reward_cfg: RewardConfig) -> Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");
    let model = Arc::new(SkeletonModel::load(format!("{root}/models/signer.json"))?);
    let clip = Arc::new(MotionClip::load(format!("{root}/clips/above.json"), &model)?);
    let mut env =
        SignEnv::new(model.clone(), clip, reward_cfg, Default::default(), 0, 0)?;
    env.episode.rsi = false;
    env.reset();

    println!("{label}:");
    println!(
        "{:>5} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}",
        "step", "r_p,b", "r_p,h", "r_v,b", "r_v,h", "r_e", "r_r", "total"
    );
    let hold = env.reference_dyn_state(0).q;
    for step in 1..=8 {
        let out = env.step(&hold)?;
        let b = out.breakdown;
        println!(
            "{step:>5} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>10.3e}",
            b.r_pose_body, b.r_pose_hand, b.r_vel_body, b.r_vel_hand, b.r_end_effector, b.r_root,
            b.total
        );
    }
    println!();
    Ok(())
}

fn main() -> Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");
    let model = SkeletonModel::load(format!("{root}/models/signer.json"))?;
    let stock = RewardConfig::for_model(&model);
    let tuned = builtin_factor_sets()
        .into_iter()
        .find(|s| s.name == "run3")
        .expect("run3 is builtin")
        .to_reward_config(&stock);
    run("stock scales (k_ph 2, k_vh 0.1), holding frame 0", stock)?;
    run("tuned scales (k_ph 0.2, k_vh 1e-4), holding frame 0", tuned)?;
    Ok(())
}
