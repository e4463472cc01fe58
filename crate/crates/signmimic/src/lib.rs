//! Motion imitation for a signing upper-body humanoid.
//!
//! The crate teaches a PD-actuated character (13 body joints, two
//! mirrored 16-joint hands) to reproduce sign-language motion clips.
//! Tracking quality is scored by a multiplicative reward whose factors
//! cover body pose, hand pose, their velocities, end-effector placement,
//! and the root; a PPO learner trains against it, and kinematic and
//! PD-tracked replays of the same clips give per-clip performance
//! ceilings.
//!
//! Start from [`synth::signer_model`] and the `examples/` directory; the
//! `signmimic` binary exposes the same pipeline as subcommands.

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod math;
pub mod motion;
pub mod retarget;
pub mod reward;
pub mod rl;
pub mod skeleton;
pub mod synth;

pub use error::{Error, Result};
