//! Imitation environment: PD-simulated character tracking a reference
//! clip at 30 Hz control over 240 Hz substeps.
//!
//! Actions are absolute PD position targets for every actuated DoF
//! (clamped to joint limits, zero desired velocity). The root is driven
//! kinematically along the clip. Observations are root-relative link
//! states plus the clip phase:
//!
//! ```text
//! obs = [phase,
//!        per link: pos(3), rot quat wxyz w>=0 (4), linvel(3), angvel(3)]
//! ```
//!
//! so `obs_dim = 1 + 13 * links`. Episodes start at a uniformly random
//! reference frame (RSI) unless disabled, and truncate at `max_steps`
//! (one clip cycle by default).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, ControlTarget, DynState};
use crate::error::{Error, Result};
use crate::math::{self, Quat, Vec3};
use crate::motion::MotionClip;
use crate::reward::{self, RewardBreakdown, RewardConfig, RewardErrors};
use crate::skeleton::{LinkState, Pose, SkeletonModel};

pub const CONTROL_RATE: f64 = 30.0;
pub const SIM_RATE: f64 = 240.0;
pub const SUBSTEPS: usize = 8;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    /// Steps per episode; `None` means one clip cycle.
    pub max_steps: Option<usize>,
    /// Reference state initialization: start episodes at a random frame.
    pub rsi: bool,
    /// Treat the clip as cyclic (frame n-1 identified with frame 0).
    pub loop_clip: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig { max_steps: None, rsi: true, loop_clip: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation(pub Vec<f64>);

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub breakdown: RewardBreakdown,
}

/// Everything needed to reproduce an env mid-episode inside a checkpoint.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct EnvSnapshot {
    pub state: DynState,
    pub start_frame: usize,
    pub tick: usize,
    pub rng: ChaCha8Rng,
    pub fingerprint: String,
}

pub struct SignEnv {
    model: Arc<SkeletonModel>,
    clip: Arc<MotionClip>,
    pub reward_cfg: RewardConfig,
    pub episode: EpisodeConfig,
    // Reference tables at the control rate.
    ref_coords: Vec<Vec<f64>>,
    ref_vel: Vec<Vec<f64>>,
    ref_root_pos: Vec<Vec3>,
    ref_root_rot: Vec<Quat>,
    ref_root_linvel: Vec<Vec3>,
    ref_root_angvel: Vec<Vec3>,
    ref_poses: Vec<Pose>,
    ref_fk: Vec<Vec<LinkState>>,
    cycle: usize,
    max_steps: usize,
    state: DynState,
    start_frame: usize,
    tick: usize,
    rng: ChaCha8Rng,
}

impl SignEnv {
    /// `seed` is the run seed; `stream` separates parallel env instances
    /// so worker count never changes any env's random draws.
    pub fn new(
        model: Arc<SkeletonModel>,
        clip: Arc<MotionClip>,
        reward_cfg: RewardConfig,
        episode: EpisodeConfig,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        reward_cfg.validate(&model)?;
        if (clip.rate - CONTROL_RATE).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "clip '{}' is sampled at {} Hz, control runs at {CONTROL_RATE} Hz; resample it",
                clip.label, clip.rate
            )));
        }
        let n = clip.frames.len();
        if n < 2 {
            return Err(Error::validation(format!(
                "clip '{}' needs at least 2 frames to track",
                clip.label
            )));
        }
        let looping = episode.loop_clip;
        let cycle = if looping { n - 1 } else { n };

        let coords: Vec<Vec<f64>> =
            clip.frames.iter().map(|f| model.pose_to_coords(f)).collect();
        let rate = clip.rate;
        let dofs = model.total_dofs;
        let wrap = |i: isize| -> usize {
            if looping {
                i.rem_euclid(cycle as isize) as usize
            } else {
                i.clamp(0, n as isize - 1) as usize
            }
        };
        let mut ref_vel = Vec::with_capacity(n);
        let mut ref_root_linvel = Vec::with_capacity(n);
        let mut ref_root_angvel = Vec::with_capacity(n);
        for i in 0..n {
            let (prev, next, scale) = if looping {
                (wrap(i as isize - 1), wrap(i as isize + 1), rate / 2.0)
            } else if i == 0 {
                (0, 1, rate)
            } else if i == n - 1 {
                (n - 2, n - 1, rate)
            } else {
                (i - 1, i + 1, rate / 2.0)
            };
            let mut v = vec![0.0; dofs];
            for d in 0..dofs {
                v[d] = (coords[next][d] - coords[prev][d]) * scale;
            }
            ref_vel.push(v);
            let (fp, fn_) = (&clip.frames[prev], &clip.frames[next]);
            ref_root_linvel.push((fn_.root_position - fp.root_position) * scale);
            let dq = fn_.root_rotation * fp.root_rotation.inverse();
            ref_root_angvel.push(math::quat_to_expmap(&dq) * scale);
        }
        // Reference poses are rebuilt from the flat coordinates rather
        // than taken from the clip, so a state pinned to `ref_coords`
        // compares bit-identically (the exponential-map roundtrip
        // perturbs quaternions at the last ulp).
        let ref_poses: Vec<Pose> = (0..n)
            .map(|i| {
                model.coords_to_pose(
                    &coords[i],
                    clip.frames[i].root_position,
                    clip.frames[i].root_rotation,
                )
            })
            .collect();
        let ref_fk: Vec<Vec<LinkState>> = ref_poses.iter().map(|f| model.fk(f)).collect();
        let ref_root_pos = clip.frames.iter().map(|f| f.root_position).collect();
        let ref_root_rot = clip.frames.iter().map(|f| f.root_rotation).collect();

        let max_steps = episode.max_steps.unwrap_or(cycle);
        if max_steps == 0 {
            return Err(Error::validation("episode max_steps must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut env = SignEnv {
            model,
            clip,
            reward_cfg,
            episode,
            ref_coords: coords,
            ref_vel,
            ref_root_pos,
            ref_root_rot,
            ref_root_linvel,
            ref_root_angvel,
            ref_poses,
            ref_fk,
            cycle,
            max_steps,
            state: DynState { q: vec![0.0; dofs], qdot: vec![0.0; dofs], time: 0.0 },
            start_frame: 0,
            tick: 0,
            rng,
        };
        env.reset();
        Ok(env)
    }

    pub fn model(&self) -> &Arc<SkeletonModel> {
        &self.model
    }

    pub fn clip(&self) -> &Arc<MotionClip> {
        &self.clip
    }

    pub fn obs_dim(&self) -> usize {
        1 + 13 * self.model.links.len()
    }

    pub fn action_dim(&self) -> usize {
        self.model.total_dofs
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn tick(&self) -> usize {
        self.tick
    }

    /// Ties checkpoints to the exact model and clip they were trained on.
    pub fn fingerprint(&self) -> String {
        format!("{}:{}", self.model.source_hash, self.clip.source_hash)
    }

    /// Reference frame index for an episode-relative control tick.
    pub fn ref_index(&self, tick: usize) -> usize {
        let i = self.start_frame + tick;
        if self.episode.loop_clip {
            i % self.cycle
        } else {
            i.min(self.clip.frames.len() - 1)
        }
    }

    /// Reference coordinates and finite-difference velocities at a tick,
    /// packaged as a dynamic state.
    pub fn reference_dyn_state(&self, tick: usize) -> DynState {
        let r = self.ref_index(tick);
        DynState {
            q: self.ref_coords[r].clone(),
            qdot: self.ref_vel[r].clone(),
            time: tick as f64 / CONTROL_RATE,
        }
    }

    /// Tracking setpoint for a tick: reference coordinates with the
    /// reference velocity as feed-forward.
    pub fn reference_target(&self, tick: usize) -> ControlTarget {
        let r = self.ref_index(tick);
        ControlTarget { q_des: self.ref_coords[r].clone(), qdot_des: self.ref_vel[r].clone() }
    }

    pub fn state(&self) -> &DynState {
        &self.state
    }

    /// Kinematic root transform at an episode-relative tick, for pose
    /// exports.
    pub fn root_pose_at(&self, tick: usize) -> (Vec3, Quat) {
        let r = self.ref_index(tick);
        (self.ref_root_pos[r], self.ref_root_rot[r])
    }

    /// Overwrites the dynamic state; the kinematic-ceiling baseline uses
    /// this to pin the character to the reference.
    pub fn set_state(&mut self, state: DynState) -> Result<()> {
        if state.q.len() != self.model.total_dofs || state.qdot.len() != self.model.total_dofs {
            return Err(Error::contract("set_state: wrong coordinate count"));
        }
        self.state = state;
        Ok(())
    }

    pub fn reset(&mut self) -> Observation {
        self.start_frame =
            if self.episode.rsi { self.rng.gen_range(0..self.cycle) } else { 0 };
        self.tick = 0;
        self.state = self.reference_dyn_state(0);
        self.observe()
    }

    /// Reward channels of the current state measured against the
    /// reference at `tick`.
    pub fn evaluate_at(&self, tick: usize) -> Result<RewardBreakdown> {
        let r = self.ref_index(tick);
        let sim_pose = self.sim_pose(r);
        let sim_fk = self.model.fk(&sim_pose);
        let reference = &self.ref_poses[r];
        let errors = RewardErrors {
            pose_body: reward::pose_error(
                &self.model,
                &sim_pose,
                reference,
                &self.reward_cfg.body_joints,
            ),
            pose_hand: reward::pose_error(
                &self.model,
                &sim_pose,
                reference,
                &self.reward_cfg.hand_joints,
            ),
            vel_body: reward::velocity_error(
                &self.model,
                &self.state.qdot,
                &self.ref_vel[r],
                &self.reward_cfg.body_joints,
            ),
            vel_hand: reward::velocity_error(
                &self.model,
                &self.state.qdot,
                &self.ref_vel[r],
                &self.reward_cfg.hand_joints,
            ),
            end_effector: reward::end_effector_error(
                &self.model,
                &sim_fk,
                &self.ref_fk[r],
                &self.reward_cfg.end_effector_links,
            ),
            root: reward::root_error(&sim_pose, reference),
        };
        reward::compose(&self.reward_cfg, &errors)
    }

    /// The simulated pose at reference index `r`: actuated coordinates
    /// from the dynamic state, root pinned to the reference.
    fn sim_pose(&self, r: usize) -> Pose {
        self.model.coords_to_pose(&self.state.q, self.ref_root_pos[r], self.ref_root_rot[r])
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        if action.len() != self.model.total_dofs {
            return Err(Error::contract(format!(
                "action has {} entries, expected {}",
                action.len(),
                self.model.total_dofs
            )));
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::contract("action contains non-finite values"));
        }
        let q_des: Vec<f64> = action
            .iter()
            .enumerate()
            .map(|(i, a)| a.clamp(self.model.dof_lo[i], self.model.dof_hi[i]))
            .collect();
        let target = ControlTarget::hold(q_des);
        for _ in 0..SUBSTEPS {
            self.state = dynamics::step(&self.model, &self.state, &target, 1.0 / SIM_RATE)?;
        }
        self.tick += 1;
        let breakdown = self.evaluate_at(self.tick)?;
        let done = self.tick >= self.max_steps;
        Ok(StepOutcome {
            observation: self.observe(),
            reward: breakdown.total,
            done,
            breakdown,
        })
    }

    pub fn observe(&self) -> Observation {
        let r = self.ref_index(self.tick);
        let pose = self.sim_pose(r);
        let kin = self.model.fk_velocity(
            &pose,
            &self.state.qdot,
            (self.ref_root_linvel[r], self.ref_root_angvel[r]),
        );
        let root_rot_inv = pose.root_rotation.inverse();
        let root = &kin[self.model.root_link];
        let mut obs = Vec::with_capacity(self.obs_dim());
        obs.push(self.phase());
        for link in &kin {
            let p = root_rot_inv * (link.position - root.position);
            let mut q = root_rot_inv * link.rotation;
            if q.w < 0.0 {
                q = Quat::from_quaternion(nalgebra::Quaternion::from(-q.coords));
            }
            let v = root_rot_inv * (link.linear_velocity - root.linear_velocity);
            let w = root_rot_inv * (link.angular_velocity - root.angular_velocity);
            obs.extend_from_slice(&[
                p.x, p.y, p.z, q.w, q.i, q.j, q.k, v.x, v.y, v.z, w.x, w.y, w.z,
            ]);
        }
        Observation(obs)
    }

    /// Clip phase of the current reference index, in [0, 1).
    pub fn phase(&self) -> f64 {
        self.ref_index(self.tick) as f64 / self.cycle as f64
    }

    pub fn snapshot(&self) -> EnvSnapshot {
        EnvSnapshot {
            state: self.state.clone(),
            start_frame: self.start_frame,
            tick: self.tick,
            rng: self.rng.clone(),
            fingerprint: self.fingerprint(),
        }
    }

    pub fn restore(&mut self, snap: EnvSnapshot) -> Result<()> {
        if snap.fingerprint != self.fingerprint() {
            return Err(Error::CheckpointMismatch(format!(
                "env snapshot was taken against {}, this env is {}",
                snap.fingerprint,
                self.fingerprint()
            )));
        }
        if snap.state.q.len() != self.model.total_dofs {
            return Err(Error::CheckpointMismatch("snapshot coordinate count differs".into()));
        }
        self.state = snap.state;
        self.start_frame = snap.start_frame;
        self.tick = snap.tick;
        self.rng = snap.rng;
        Ok(())
    }
}
