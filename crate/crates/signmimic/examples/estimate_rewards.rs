//! Replays the bundled tracking-error trace under the four explored
//! scale sets.
//!
//!     cargo run --example estimate_rewards
//!
//! The trace records per-step channel errors of the position-tracking
//! bound on the tuning motion. Replaying it through the reward under
//! different scales predicts what each set could earn without training
//! anything: the stock scales annihilate, the tuned ones do not.

use signmimic::artifacts::parse_metrics_csv;
use signmimic::reward::{builtin_factor_sets, estimate};
use signmimic::{Error, Result};

fn main() -> Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/traces/tuning_errors.csv");
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    let rows = parse_metrics_csv(&text)?;
    let errors: Vec<_> = rows.iter().map(|r| r.breakdown.errors).collect();
    println!("replaying {} recorded steps of the tuning motion\n", errors.len());

    println!(
        "{:<10} {:>7} {:>8}   {:>9} {:>9}",
        "set", "k_p,h", "k_v,h", "r^p*r^v", "total"
    );
    for set in builtin_factor_sets() {
        let est = estimate(&set, &errors)?;
        println!(
            "{:<10} {:>7} {:>8}   {:>9.4} {:>9.3e}",
            set.name, set.k_pose_hand, set.k_vel_hand, est.pose_velocity, est.mean.total
        );
    }
    println!("\nsource study: 0 / 0.297 / 0.694 / 0.790 on its tuning motion");
    Ok(())
}
