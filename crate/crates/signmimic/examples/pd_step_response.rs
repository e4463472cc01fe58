//! Step response of the elbow PD loop under different damping gains.
//!
//!     cargo run --example pd_step_response
//!
//! The bundled elbow runs kd = 6. Raising kd toward critical damping
//! slows the rise, which is why the gains were refined downward: with a
//! 30 Hz target stream, lag costs more reward than a little overshoot.

use signmimic::dynamics::{step, ControlTarget, DynState};
use signmimic::env::SIM_RATE;
use signmimic::skeleton::SkeletonModel;
use signmimic::Result;

/// Simulates a step to `target` rad and returns (t90, overshoot).
fn response(model: &SkeletonModel, dof: usize, target: f64) -> Result<(f64, f64)> {
    let mut state = DynState::rest(model);
    let mut goal = ControlTarget::hold(vec![0.0; model.total_dofs]);
    goal.q_des[dof] = target;
    let dt = 1.0 / SIM_RATE;
    let mut t90 = f64::NAN;
    let mut peak: f64 = 0.0;
    for i in 0..(2.0 * SIM_RATE) as usize {
        state = step(model, &state, &goal, dt)?;
        peak = peak.max(state.q[dof]);
        if t90.is_nan() && state.q[dof] >= 0.9 * target {
            t90 = (i + 1) as f64 * dt;
        }
    }
    Ok((t90, (peak - target).max(0.0) / target))
}

fn main() -> Result<()> {
    let base = SkeletonModel::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/assets/models/signer.json"
    ))?;
    let elbow_joint = base.joint_index("right_elbow").expect("bundled joint");
    let dof = base.dof_base[elbow_joint].expect("elbow is actuated");
    let target = 0.5;

    println!("elbow step to {target} rad (kp {}):", base.joints[elbow_joint].kp);
    println!("{:>6} {:>10} {:>12}", "kd", "t90 [s]", "overshoot");
    for kd in [2.0, 6.0, 12.0, 30.0, 60.0] {
        let mut spec = base.spec().clone();
        // Gains are validated as left/right mirrors; change both sides.
        for j in spec.joints.iter_mut() {
            if j.name.ends_with("_elbow") {
                j.kd = Some(kd);
            }
        }
        let model = SkeletonModel::from_spec(spec)?;
        let (t90, overshoot) = response(&model, dof, target)?;
        let marker = if kd == 6.0 { "  <- bundled" } else { "" };
        println!("{kd:>6} {t90:>10.4} {:>11.1}%{marker}", 100.0 * overshoot);
    }
    Ok(())
}
