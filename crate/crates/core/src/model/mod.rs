//! Planar articulated biped: description, dynamics, contact, PD servo loop,
//! and the two integration backends.

pub mod backend;
pub mod control;
pub mod description;
pub mod dynamics;
pub mod pd;
pub mod state;

pub use backend::{step_dynamics, Backend, BackendKind, Rk4, SemiImplicitEuler};
pub use control::{DelayLine, Simulator, DECIMATION, PHYSICS_DT, POLICY_DT};
pub use description::{RobotDescription, JOINT_NAMES, NUM_ACTUATED};
pub use dynamics::{Model, PhysicsConfig};
pub use pd::pd_torques;
pub use state::{
    wrap_angle, BasePose, ContactState, ExternalDisturbance, JointState, SimState, JOINT_OFFSET,
    NUM_DOF,
};
