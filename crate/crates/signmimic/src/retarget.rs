//! Ideal-retargeting baselines: command the reference motion directly,
//! with no learned policy, and report the resulting reward ceiling.
//!
//! Two modes, because "track the reference perfectly" is ambiguous.
//! `kinematic` pins the state to the reference each step and bounds any
//! policy from above by construction. `pd_tracked` commands the
//! reference poses through the same PD actuation a policy would use
//! (position targets, zero desired velocity) and is the physically
//! honest bound. Desired velocity stays zero so raising any kd adds
//! lag and can only lower this ceiling.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics;
use crate::env::{EpisodeConfig, SignEnv, SIM_RATE, SUBSTEPS};
use crate::error::{Error, Result};
use crate::math;
use crate::motion::MotionClip;
use crate::reward::{mean_breakdown, RewardBreakdown, RewardConfig};
use crate::skeleton::SkeletonModel;

pub const DEFAULT_CEILING_STEPS: usize = 2000;

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CeilingMode {
    Kinematic,
    PdTracked,
}

impl std::fmt::Display for CeilingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CeilingMode::Kinematic => write!(f, "kinematic"),
            CeilingMode::PdTracked => write!(f, "pd_tracked"),
        }
    }
}

impl std::str::FromStr for CeilingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kinematic" => Ok(CeilingMode::Kinematic),
            "pd_tracked" => Ok(CeilingMode::PdTracked),
            other => Err(Error::validation(format!(
                "unknown ceiling mode '{other}' (kinematic, pd_tracked)"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct CeilingReport {
    pub clip: String,
    pub mode: CeilingMode,
    pub steps: usize,
    /// Sum of the per-step series.
    pub total_reward: f64,
    pub reward_mean: f64,
    /// Field-wise means over the series, errors included.
    pub mean: RewardBreakdown,
    pub rows: Vec<RewardBreakdown>,
}

/// Runs one ceiling rollout. The env is reset to reference frame 0
/// (reference-state initialization is disabled for the duration) and its
/// state is overwritten along the way.
pub fn ceiling(env: &mut SignEnv, mode: CeilingMode, steps: usize) -> Result<CeilingReport> {
    if steps == 0 {
        return Err(Error::validation("ceiling needs at least one step"));
    }
    let rsi = env.episode.rsi;
    env.episode.rsi = false;
    env.reset();
    env.episode.rsi = rsi;
    let model = env.model().clone();
    let mut rows = Vec::with_capacity(steps);
    match mode {
        CeilingMode::Kinematic => {
            for t in 1..=steps {
                let s = env.reference_dyn_state(t);
                env.set_state(s)?;
                rows.push(env.evaluate_at(t)?);
            }
        }
        CeilingMode::PdTracked => {
            let dt = 1.0 / SIM_RATE;
            let mut state = env.reference_dyn_state(0);
            for t in 1..=steps {
                let target = dynamics::ControlTarget::hold(env.reference_dyn_state(t).q);
                for _ in 0..SUBSTEPS {
                    state = dynamics::step(&model, &state, &target, dt)?;
                }
                env.set_state(state.clone())?;
                rows.push(env.evaluate_at(t)?);
            }
        }
    }
    let series: Vec<f64> = rows.iter().map(|b| b.total).collect();
    let total = math::sum_pairwise(&series);
    Ok(CeilingReport {
        clip: env.clip().label.clone(),
        mode,
        steps,
        total_reward: total,
        reward_mean: total / steps as f64,
        mean: mean_breakdown(&rows),
        rows,
    })
}

/// Ceilings for a batch of clips, fanned out over up to `threads`
/// workers. Order of the reports matches the clip order.
pub fn ceiling_batch(
    model: &Arc<SkeletonModel>,
    clips: &[Arc<MotionClip>],
    reward_cfg: &RewardConfig,
    mode: CeilingMode,
    steps: usize,
    threads: usize,
) -> Result<Vec<CeilingReport>> {
    let threads = threads.max(1);
    let mut out: Vec<Option<Result<CeilingReport>>> = Vec::new();
    out.resize_with(clips.len(), || None);
    let jobs: Vec<usize> = (0..clips.len()).collect();
    std::thread::scope(|scope| {
        for (chunk, slots) in jobs
            .chunks(clips.len().div_ceil(threads).max(1))
            .zip(out.chunks_mut(clips.len().div_ceil(threads).max(1)))
        {
            scope.spawn(move || {
                for (&i, slot) in chunk.iter().zip(slots.iter_mut()) {
                    let run = || -> Result<CeilingReport> {
                        let mut env = SignEnv::new(
                            model.clone(),
                            clips[i].clone(),
                            reward_cfg.clone(),
                            EpisodeConfig::default(),
                            0,
                            0,
                        )?;
                        ceiling(&mut env, mode, steps)
                    };
                    *slot = Some(run());
                }
            });
        }
    });
    out.into_iter()
        .map(|slot| slot.expect("ceiling worker left a slot unfilled"))
        .collect()
}
