//! Planar biped locomotion laboratory.
//!
//! Rigid-body simulation with two integration backends, a periodic gait
//! generator, a partially observable environment with domain randomization,
//! the locomotion reward suite, PPO with an asymmetric actor-critic, and a
//! sim-to-sim validation harness.

// `!(x > 0.0)` is used on purpose so NaN fails validation; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod env;
pub mod error;
pub mod gait;
pub mod model;
pub mod ppo;
pub mod rewards;
pub mod scalar;
pub mod sim2sim;
pub mod terrain;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelF64 = model::Model<f64>;
pub type ModelF32 = model::Model<f32>;
pub type SimulatorF64 = model::Simulator<f64>;
pub type PolicyF32 = ppo::GaussianPolicy<f32>;
pub type PolicyF64 = ppo::GaussianPolicy<f64>;
pub type ValueF32 = ppo::ValueFunction<f32>;
pub type ValueF64 = ppo::ValueFunction<f64>;
pub type MlpF32 = ppo::Mlp<f32>;
pub type MlpF64 = ppo::Mlp<f64>;
