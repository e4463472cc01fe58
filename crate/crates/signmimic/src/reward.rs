//! Multiplicative imitation reward.
//!
//! Per control step the reward is a product of exponential factors, one
//! per error channel:
//!
//! ```text
//! r = r_pb * r_ph * r_vb * r_vh * r_e * r_r,   r_x = exp(-k_x eps_x)
//! ```
//!
//! Pose and velocity are split into body and hand channels so their
//! scales can differ by orders of magnitude. The product form means any
//! channel driven to zero annihilates the whole reward, which is exactly
//! the failure mode the hand scales have to avoid.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, sum_pairwise};
use crate::skeleton::{JointRotation, LinkState, Pose, SkeletonModel};

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub k_pose_body: f64,
    pub k_pose_hand: f64,
    pub k_vel_body: f64,
    pub k_vel_hand: f64,
    pub k_end_effector: f64,
    pub k_root: f64,
    pub body_joints: BTreeSet<String>,
    pub hand_joints: BTreeSet<String>,
    /// Links whose world positions feed the end-effector term. Wrists
    /// only: fingertip placement is already covered by the hand pose
    /// channel.
    pub end_effector_links: Vec<String>,
}

impl Default for RewardConfig {
    /// Scales inherited from humanoid imitation baselines; the hand
    /// channels start at the body scales and are meant to be swept.
    fn default() -> Self {
        RewardConfig {
            k_pose_body: 2.0,
            k_pose_hand: 2.0,
            k_vel_body: 0.1,
            k_vel_hand: 0.1,
            k_end_effector: 40.0,
            k_root: 10.0,
            body_joints: BTreeSet::new(),
            hand_joints: BTreeSet::new(),
            end_effector_links: Vec::new(),
        }
    }
}

impl RewardConfig {
    /// Default channel split for a model: hand joints are everything below
    /// the palms, body joints are the remaining actuated joints, end
    /// effectors are the palm links (driven by the wrists).
    pub fn for_model(model: &SkeletonModel) -> Self {
        let mut cfg = RewardConfig::default();
        let mut hand_links = vec![false; model.links.len()];
        for (i, l) in model.links.iter().enumerate() {
            let palm_below = l.name.ends_with("_palm")
                || l.parent.map(|p| hand_links[p]).unwrap_or(false);
            hand_links[i] = palm_below;
            if l.name.ends_with("_palm") {
                cfg.end_effector_links.push(l.name.clone());
            }
        }
        for &j in &model.actuated {
            let joint = &model.joints[j];
            if hand_links[joint.child_link] {
                cfg.hand_joints.insert(joint.name.clone());
            } else {
                cfg.body_joints.insert(joint.name.clone());
            }
        }
        cfg
    }

    pub fn validate(&self, model: &SkeletonModel) -> Result<()> {
        for k in [
            self.k_pose_body,
            self.k_pose_hand,
            self.k_vel_body,
            self.k_vel_hand,
            self.k_end_effector,
            self.k_root,
        ] {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::validation(format!("reward scale {k} must be >= 0 and finite")));
            }
        }
        if self.body_joints.is_empty() {
            return Err(Error::validation("reward body_joints must not be empty"));
        }
        if !self.body_joints.is_disjoint(&self.hand_joints) {
            let overlap: Vec<_> =
                self.body_joints.intersection(&self.hand_joints).cloned().collect();
            return Err(Error::validation(format!(
                "body and hand joint sets overlap: {overlap:?}"
            )));
        }
        for name in self.body_joints.iter().chain(&self.hand_joints) {
            let j = model
                .joint_index(name)
                .ok_or_else(|| Error::validation(format!("reward set names unknown joint '{name}'")))?;
            if !model.is_actuated(j) {
                return Err(Error::validation(format!(
                    "reward set includes non-actuated joint '{name}'"
                )));
            }
        }
        for name in &self.end_effector_links {
            if model.link_index(name).is_none() {
                return Err(Error::validation(format!(
                    "end effector names unknown link '{name}'"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardErrors {
    pub pose_body: f64,
    pub pose_hand: f64,
    pub vel_body: f64,
    pub vel_hand: f64,
    pub end_effector: f64,
    pub root: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_pose_body: f64,
    pub r_pose_hand: f64,
    pub r_vel_body: f64,
    pub r_vel_hand: f64,
    pub r_end_effector: f64,
    pub r_root: f64,
    pub total: f64,
    pub errors: RewardErrors,
}

/// Sum of squared rotation distances over `set`: squared geodesic angle
/// for spherical joints, squared angle difference for revolute ones.
pub fn pose_error(
    model: &SkeletonModel,
    sim: &Pose,
    reference: &Pose,
    set: &BTreeSet<String>,
) -> f64 {
    let mut terms = Vec::with_capacity(set.len());
    for (j, joint) in model.joints.iter().enumerate() {
        if !set.contains(&joint.name) {
            continue;
        }
        let d = match (&sim.joint_rotations[j], &reference.joint_rotations[j]) {
            (JointRotation::Spherical(a), JointRotation::Spherical(b)) => math::geodesic(a, b),
            (JointRotation::Revolute(a), JointRotation::Revolute(b)) => a - b,
            _ => 0.0,
        };
        terms.push(d * d);
    }
    sum_pairwise(&terms)
}

/// Sum of squared coordinate-rate differences over the DoFs of `set`.
pub fn velocity_error(
    model: &SkeletonModel,
    sim_qdot: &[f64],
    ref_qdot: &[f64],
    set: &BTreeSet<String>,
) -> f64 {
    let mut terms = Vec::new();
    for &j in &model.actuated {
        if !set.contains(&model.joints[j].name) {
            continue;
        }
        let (base, n) = model.dof_slice(j).unwrap();
        for d in base..base + n {
            let dv = sim_qdot[d] - ref_qdot[d];
            terms.push(dv * dv);
        }
    }
    sum_pairwise(&terms)
}

/// Sum of squared world-position differences of the end-effector links.
pub fn end_effector_error(
    model: &SkeletonModel,
    sim_fk: &[LinkState],
    ref_fk: &[LinkState],
    links: &[String],
) -> f64 {
    let terms: Vec<f64> = links
        .iter()
        .filter_map(|name| model.link_index(name))
        .map(|l| (sim_fk[l].position - ref_fk[l].position).norm_squared())
        .collect();
    sum_pairwise(&terms)
}

/// Root deviation: squared translation distance plus squared geodesic
/// angle.
pub fn root_error(sim: &Pose, reference: &Pose) -> f64 {
    let dp = (sim.root_position - reference.root_position).norm_squared();
    let dq = math::geodesic(&sim.root_rotation, &reference.root_rotation);
    dp + dq * dq
}

/// Folds the error channels into the multiplicative reward.
pub fn compose(cfg: &RewardConfig, errors: &RewardErrors) -> Result<RewardBreakdown> {
    let pairs = [
        (cfg.k_pose_body, errors.pose_body),
        (cfg.k_pose_hand, errors.pose_hand),
        (cfg.k_vel_body, errors.vel_body),
        (cfg.k_vel_hand, errors.vel_hand),
        (cfg.k_end_effector, errors.end_effector),
        (cfg.k_root, errors.root),
    ];
    let mut factors = [0.0; 6];
    for (i, (k, e)) in pairs.iter().enumerate() {
        if !(*k >= 0.0 && k.is_finite()) {
            return Err(Error::contract(format!("compose: scale {k} must be >= 0 and finite")));
        }
        if !(*e >= 0.0 && e.is_finite()) {
            return Err(Error::contract(format!("compose: error {e} must be >= 0 and finite")));
        }
        factors[i] = (-k * e).exp();
    }
    let total = factors.iter().product();
    Ok(RewardBreakdown {
        r_pose_body: factors[0],
        r_pose_hand: factors[1],
        r_vel_body: factors[2],
        r_vel_hand: factors[3],
        r_end_effector: factors[4],
        r_root: factors[5],
        total,
        errors: *errors,
    })
}

/// Field-wise means over a reward series, errors included. The mean of
/// `total` is the mean of the per-step products, not a product of means.
pub fn mean_breakdown(rows: &[RewardBreakdown]) -> RewardBreakdown {
    let pick = |f: &dyn Fn(&RewardBreakdown) -> f64| {
        let xs: Vec<f64> = rows.iter().map(f).collect();
        math::mean(&xs)
    };
    RewardBreakdown {
        r_pose_body: pick(&|b| b.r_pose_body),
        r_pose_hand: pick(&|b| b.r_pose_hand),
        r_vel_body: pick(&|b| b.r_vel_body),
        r_vel_hand: pick(&|b| b.r_vel_hand),
        r_end_effector: pick(&|b| b.r_end_effector),
        r_root: pick(&|b| b.r_root),
        total: pick(&|b| b.total),
        errors: RewardErrors {
            pose_body: pick(&|b| b.errors.pose_body),
            pose_hand: pick(&|b| b.errors.pose_hand),
            vel_body: pick(&|b| b.errors.vel_body),
            vel_hand: pick(&|b| b.errors.vel_hand),
            end_effector: pick(&|b| b.errors.end_effector),
            root: pick(&|b| b.errors.root),
        },
    }
}

/// A named set of reward scales, used to replay recorded error traces
/// under weights other than the ones the trace was collected with.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FactorSet {
    pub name: String,
    pub k_pose_body: f64,
    pub k_pose_hand: f64,
    pub k_vel_body: f64,
    pub k_vel_hand: f64,
    #[serde(default = "default_k_end_effector")]
    pub k_end_effector: f64,
    #[serde(default = "default_k_root")]
    pub k_root: f64,
}

fn default_k_end_effector() -> f64 {
    40.0
}

fn default_k_root() -> f64 {
    10.0
}

impl FactorSet {
    pub fn named(name: &str, k_pb: f64, k_ph: f64, k_vb: f64, k_vh: f64) -> FactorSet {
        FactorSet {
            name: name.to_string(),
            k_pose_body: k_pb,
            k_pose_hand: k_ph,
            k_vel_body: k_vb,
            k_vel_hand: k_vh,
            k_end_effector: default_k_end_effector(),
            k_root: default_k_root(),
        }
    }

    /// `base` supplies the joint sets; the scales come from `self`.
    pub fn to_reward_config(&self, base: &RewardConfig) -> RewardConfig {
        RewardConfig {
            k_pose_body: self.k_pose_body,
            k_pose_hand: self.k_pose_hand,
            k_vel_body: self.k_vel_body,
            k_vel_hand: self.k_vel_hand,
            k_end_effector: self.k_end_effector,
            k_root: self.k_root,
            ..base.clone()
        }
    }
}

/// The four scale sets explored while tuning the hand channels. The
/// stock scales annihilate the reward on jittery hand data; `run3` is
/// what sign training ships with.
pub fn builtin_factor_sets() -> Vec<FactorSet> {
    vec![
        FactorSet::named("default", 2.0, 2.0, 1e-1, 1e-1),
        FactorSet::named("run1", 2.0, 5e-1, 1e-1, 5e-4),
        FactorSet::named("run2", 2.0, 2e-1, 1e-1, 1e-4),
        FactorSet::named("run3", 2.0, 2e-1, 5e-3, 1e-4),
    ]
}

/// What a recorded error trace would have earned under `set`.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct FactorEstimate {
    pub set: FactorSet,
    /// Channel means over the replayed trace.
    pub mean: RewardBreakdown,
    /// Mean over rows of the pose and velocity product
    /// r_pb * r_ph * r_vb * r_vh, the quantity the scales are tuned on.
    pub pose_velocity: f64,
}

/// Replays an error trace through `compose` under `set`. No simulation
/// runs; the estimate is exact for the trace it was recorded from and an
/// approximation for any policy that tracks about as well.
pub fn estimate(set: &FactorSet, errors: &[RewardErrors]) -> Result<FactorEstimate> {
    if errors.is_empty() {
        return Err(Error::validation(format!("estimate '{}': empty error trace", set.name)));
    }
    let cfg = set.to_reward_config(&RewardConfig::default());
    let mut rows = Vec::with_capacity(errors.len());
    let mut pv = Vec::with_capacity(errors.len());
    for e in errors {
        let b = compose(&cfg, e)?;
        pv.push(b.r_pose_body * b.r_pose_hand * b.r_vel_body * b.r_vel_hand);
        rows.push(b);
    }
    Ok(FactorEstimate {
        set: set.clone(),
        mean: mean_breakdown(&rows),
        pose_velocity: math::mean(&pv),
    })
}
