//! Time integrators behind a common backend interface.
//!
//! Two independent integrations of the same equations of motion serve the
//! sim-to-sim protocol: a fast semi-implicit Euler at the 1 kHz interface
//! rate and a reference RK4 that subdivides each tick.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::description::NUM_ACTUATED;
use super::dynamics::Model;
use super::state::{ExternalDisturbance, SimState, JOINT_OFFSET, NUM_DOF};

/// One physics tick of the simulator.
pub trait Backend<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;

    /// Advances `state` by `dt` with joint torques held constant over the tick.
    fn advance(
        &self,
        model: &Model<T>,
        state: &mut SimState<T>,
        joint_torques: &[T; NUM_ACTUATED],
        disturbance: &ExternalDisturbance<T>,
        dt: T,
    ) -> Result<()>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SemiImplicitEuler;

impl<T: Real> Backend<T> for SemiImplicitEuler {
    fn name(&self) -> &'static str {
        "fast"
    }

    fn advance(
        &self,
        model: &Model<T>,
        state: &mut SimState<T>,
        joint_torques: &[T; NUM_ACTUATED],
        disturbance: &ExternalDisturbance<T>,
        dt: T,
    ) -> Result<()> {
        let qdd = model.accelerations(state, &state.q, &state.qd, joint_torques, disturbance)?;
        for i in 0..NUM_DOF {
            state.qd[i] = state.qd[i] + dt * qdd[i];
            state.q[i] = state.q[i] + dt * state.qd[i];
        }
        model.update_anchors(state);
        Ok(())
    }
}

/// Classic fourth-order Runge-Kutta with `substeps` internal steps per tick.
#[derive(Debug, Clone, Copy)]
pub struct Rk4 {
    pub substeps: usize,
}

impl Default for Rk4 {
    fn default() -> Self {
        Self { substeps: 4 }
    }
}

impl<T: Real> Backend<T> for Rk4 {
    fn name(&self) -> &'static str {
        "reference"
    }

    fn advance(
        &self,
        model: &Model<T>,
        state: &mut SimState<T>,
        joint_torques: &[T; NUM_ACTUATED],
        disturbance: &ExternalDisturbance<T>,
        dt: T,
    ) -> Result<()> {
        let h = dt / T::count(self.substeps.max(1));
        let half = T::lit(0.5);
        let sixth = T::one() / T::lit(6.0);
        for _ in 0..self.substeps.max(1) {
            let (q0, v0) = (state.q, state.qd);
            let acc = |q: &[T; NUM_DOF], v: &[T; NUM_DOF]| {
                model.accelerations(state, q, v, joint_torques, disturbance)
            };
            let axpy = |x: &[T; NUM_DOF], a: T, y: &[T; NUM_DOF]| {
                let mut out = *x;
                for i in 0..NUM_DOF {
                    out[i] = x[i] + a * y[i];
                }
                out
            };
            let a1 = acc(&q0, &v0)?;
            let (q2, v2) = (axpy(&q0, h * half, &v0), axpy(&v0, h * half, &a1));
            let a2 = acc(&q2, &v2)?;
            let (q3, v3) = (axpy(&q0, h * half, &v2), axpy(&v0, h * half, &a2));
            let a3 = acc(&q3, &v3)?;
            let (q4, v4) = (axpy(&q0, h, &v3), axpy(&v0, h, &a3));
            let a4 = acc(&q4, &v4)?;
            for i in 0..NUM_DOF {
                state.q[i] = q0[i] + h * sixth * (v0[i] + (v2[i] + v3[i]) * T::lit(2.0) + v4[i]);
                state.qd[i] = v0[i] + h * sixth * (a1[i] + (a2[i] + a3[i]) * T::lit(2.0) + a4[i]);
            }
            model.update_anchors(state);
        }
        Ok(())
    }
}

/// Backend selector used by configuration and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Fast,
    Reference,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Fast => "fast",
            BackendKind::Reference => "reference",
        }
    }

    pub fn build<T: Real>(self) -> Box<dyn Backend<T>> {
        match self {
            BackendKind::Fast => Box::new(SemiImplicitEuler),
            BackendKind::Reference => Box::new(Rk4::default()),
        }
    }

    /// Static-dispatch tick used in hot loops.
    pub fn advance<T: Real>(
        self,
        model: &Model<T>,
        state: &mut SimState<T>,
        joint_torques: &[T; NUM_ACTUATED],
        disturbance: &ExternalDisturbance<T>,
        dt: T,
    ) -> Result<()> {
        match self {
            BackendKind::Fast => SemiImplicitEuler.advance(model, state, joint_torques, disturbance, dt),
            BackendKind::Reference => Rk4::default().advance(model, state, joint_torques, disturbance, dt),
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fast" => Ok(BackendKind::Fast),
            "reference" => Ok(BackendKind::Reference),
            other => Err(format!("unknown backend `{other}` (expected fast or reference)")),
        }
    }
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One dynamics tick: clamps torques to their limits, advances, and checks
/// the result is finite. The tick counter advances on success.
pub fn step_dynamics<T: Real>(
    backend: BackendKind,
    model: &Model<T>,
    state: &mut SimState<T>,
    joint_torques: &[T; NUM_ACTUATED],
    disturbance: &ExternalDisturbance<T>,
    dt: T,
) -> Result<()> {
    let tick = state.tick;
    if !disturbance.is_finite() || joint_torques.iter().any(|t| !t.is_finite()) {
        return Err(Error::Diverged { tick });
    }
    if model.fixed_base {
        for v in &mut state.qd[..JOINT_OFFSET] {
            *v = T::zero();
        }
    }
    let mut tau = *joint_torques;
    for (t, lim) in tau.iter_mut().zip(model.torque_limit.iter()) {
        *t = t.max(-*lim).min(*lim);
    }
    backend
        .advance(model, state, &tau, disturbance, dt)
        .map_err(|_| Error::Diverged { tick })?;
    if !state.is_finite() {
        return Err(Error::Diverged { tick });
    }
    state.tick += 1;
    Ok(())
}
