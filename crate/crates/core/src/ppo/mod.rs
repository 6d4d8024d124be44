//! Proximal policy optimization with an asymmetric actor-critic.

pub mod adam;
pub mod buffer;
pub mod checkpoint;
pub mod config;
pub mod gae;
pub mod mlp;
pub mod normalizer;
pub mod policy;
pub mod trainer;
pub mod update;

pub use adam::Adam;
pub use buffer::RolloutBuffer;
pub use checkpoint::Checkpoint;
pub use config::PpoConfig;
pub use gae::{clipped_objective, gae_advantages, normalize_advantages, policy_loss, value_loss};
pub use mlp::{Activation, Mlp};
pub use normalizer::RunningNorm;
pub use policy::{GaussianPolicy, ObservationBatch, PrivilegedBatch, ValueFunction};
pub use trainer::{IterationMetrics, MetricsWriter, Trainer};
pub use update::{minibatch_grad, ppo_update, total_loss, Optimizers, UpdateStats};
