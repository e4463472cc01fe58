//! Policy optimization: networks, optimizer, rollout storage, the
//! clipped-surrogate update, and the training loop.

pub mod adam;
pub mod buffer;
pub mod net;
pub mod ppo;
pub mod trainer;

pub use adam::Adam;
pub use buffer::{AdvantageMode, RolloutBuffer, StepEnd};
pub use net::{Activation, Mlp};
pub use ppo::{Batch, Ppo, UpdateStats};
pub use trainer::{evaluate, Checkpoint, CurveRow, EvalReport, EvalRow, PoseRow, TrainConfig, Trainer};
