//! Joint-space PD dynamics with per-DoF implicit (stable PD) integration.
//!
//! The model is deliberately decoupled: each actuated coordinate is a
//! second-order system with the diagonal composite-rigid-body inertia
//! frozen at rest. Control torque uses the stable-PD form, evaluating the
//! position error one step ahead:
//!
//! ```text
//! tau  = -kp (q + dt qdot - q_des) - kd (qdot - qdot_des)
//! acc  = tau / (I + kd dt + kp dt^2)
//! qdot' = qdot + dt acc          (semi-implicit Euler)
//! q'    = q + dt qdot'
//! ```
//!
//! The implicit denominator makes the update stable for arbitrarily stiff
//! gains at any time step, which the fingertip joints need.

use crate::error::{Error, Result};
use crate::motion::MotionClip;
use crate::skeleton::SkeletonModel;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DynState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub time: f64,
}

impl DynState {
    pub fn rest(model: &SkeletonModel) -> Self {
        DynState { q: vec![0.0; model.total_dofs], qdot: vec![0.0; model.total_dofs], time: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qdot).all(|x| x.is_finite()) && self.time.is_finite()
    }
}

/// PD setpoint. `hold` gives the common case of a pure position target
/// with zero desired velocity.
#[derive(Clone, Debug)]
pub struct ControlTarget {
    pub q_des: Vec<f64>,
    pub qdot_des: Vec<f64>,
}

impl ControlTarget {
    pub fn hold(q_des: Vec<f64>) -> Self {
        let n = q_des.len();
        ControlTarget { q_des, qdot_des: vec![0.0; n] }
    }
}

/// Elementwise PD error `kp (q - q_des) + kd (qdot - qdot_des)`.
pub fn pd_error(model: &SkeletonModel, state: &DynState, target: &ControlTarget) -> Result<Vec<f64>> {
    check_arity(model, state, target)?;
    if !state.is_finite() {
        return Err(Error::contract("pd_error: state contains non-finite values"));
    }
    let mut out = vec![0.0; model.total_dofs];
    for i in 0..model.total_dofs {
        out[i] = model.dof_kp[i] * (state.q[i] - target.q_des[i])
            + model.dof_kd[i] * (state.qdot[i] - target.qdot_des[i]);
    }
    Ok(out)
}

fn check_arity(model: &SkeletonModel, state: &DynState, target: &ControlTarget) -> Result<()> {
    let n = model.total_dofs;
    if state.q.len() != n || state.qdot.len() != n {
        return Err(Error::contract(format!(
            "state has {}/{} coordinates, model has {n} DoFs",
            state.q.len(),
            state.qdot.len()
        )));
    }
    if target.q_des.len() != n || target.qdot_des.len() != n {
        return Err(Error::contract(format!(
            "target has {}/{} coordinates, model has {n} DoFs",
            target.q_des.len(),
            target.qdot_des.len()
        )));
    }
    Ok(())
}

/// Core per-DoF update, exposed so callers (and tests) can drive gains
/// and inertia directly. Joint limits are inelastic: a coordinate that
/// crosses its limit is clamped and its outward velocity zeroed.
#[allow(clippy::too_many_arguments)]
pub fn step_raw(
    q: &mut [f64],
    qdot: &mut [f64],
    kp: &[f64],
    kd: &[f64],
    inertia: &[f64],
    lo: &[f64],
    hi: &[f64],
    target: &ControlTarget,
    dt: f64,
) {
    for i in 0..q.len() {
        let tau = -kp[i] * (q[i] + dt * qdot[i] - target.q_des[i])
            - kd[i] * (qdot[i] - target.qdot_des[i]);
        let acc = tau / (inertia[i] + kd[i] * dt + kp[i] * dt * dt);
        qdot[i] += dt * acc;
        q[i] += dt * qdot[i];
        if q[i] < lo[i] {
            q[i] = lo[i];
            if qdot[i] < 0.0 {
                qdot[i] = 0.0;
            }
        } else if q[i] > hi[i] {
            q[i] = hi[i];
            if qdot[i] > 0.0 {
                qdot[i] = 0.0;
            }
        }
    }
}

/// Advances the state by one simulation substep of length `dt`.
pub fn step(
    model: &SkeletonModel,
    state: &DynState,
    target: &ControlTarget,
    dt: f64,
) -> Result<DynState> {
    check_arity(model, state, target)?;
    if !state.is_finite() {
        return Err(Error::contract("step: state contains non-finite values"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::contract(format!("step: dt must be positive, got {dt}")));
    }
    let mut next = state.clone();
    step_raw(
        &mut next.q,
        &mut next.qdot,
        &model.dof_kp,
        &model.dof_kd,
        &model.dof_inertia,
        &model.dof_lo,
        &model.dof_hi,
        target,
        dt,
    );
    next.time = state.time + dt;
    if !next.is_finite() {
        let bad = next
            .q
            .iter()
            .chain(&next.qdot)
            .position(|x| !x.is_finite())
            .map(|i| model.dof_names[i % model.total_dofs].clone())
            .unwrap_or_else(|| "time".into());
        return Err(Error::Diverged { context: format!("dynamics step at joint '{bad}'") });
    }
    Ok(next)
}

/// The clip replayed as a sequence of dynamic states: coordinates straight
/// from the frames, velocities by finite differences at the clip rate
/// (central in the interior, one-sided at the ends).
pub fn rollout_kinematic(model: &SkeletonModel, clip: &MotionClip) -> Vec<DynState> {
    let n = clip.frames.len();
    let coords: Vec<Vec<f64>> = clip.frames.iter().map(|f| model.pose_to_coords(f)).collect();
    let rate = clip.rate;
    (0..n)
        .map(|i| {
            let qdot = if n == 1 {
                vec![0.0; model.total_dofs]
            } else if i == 0 {
                diff(&coords[1], &coords[0], rate)
            } else if i == n - 1 {
                diff(&coords[n - 1], &coords[n - 2], rate)
            } else {
                diff(&coords[i + 1], &coords[i - 1], rate / 2.0)
            };
            DynState { q: coords[i].clone(), qdot, time: i as f64 / rate }
        })
        .collect()
}

fn diff(a: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y) * scale).collect()
}
