//! The 100 Hz policy step: ten 1 kHz PD + dynamics ticks with an action delay line.

use std::collections::VecDeque;

use crate::error::Result;
use crate::scalar::Real;

use super::backend::{step_dynamics, BackendKind};
use super::description::NUM_ACTUATED;
use super::dynamics::Model;
use super::state::{ContactState, ExternalDisturbance, SimState, JOINT_OFFSET};

/// Physics tick length, s.
pub const PHYSICS_DT: f64 = 0.001;
/// PD ticks per policy step (1 kHz inner loop under a 100 Hz policy).
pub const DECIMATION: usize = 10;
/// Policy step length, s.
pub const POLICY_DT: f64 = PHYSICS_DT * DECIMATION as f64;

/// Per-tick queue of PD targets. With a delay of `k` ticks, the target used at
/// tick `n` is the one issued at tick `n − k`.
#[derive(Debug, Clone)]
pub struct DelayLine<T> {
    delay: usize,
    queue: VecDeque<[T; NUM_ACTUATED]>,
}

impl<T: Real> DelayLine<T> {
    /// Starts with `delay` copies of `initial` already in flight.
    pub fn new(delay: usize, initial: [T; NUM_ACTUATED]) -> Self {
        let mut queue = VecDeque::with_capacity(delay + 1);
        queue.extend(std::iter::repeat_n(initial, delay));
        Self { delay, queue }
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    /// Issues `target` for this tick and returns the target that takes effect.
    pub fn push(&mut self, target: [T; NUM_ACTUATED]) -> [T; NUM_ACTUATED] {
        self.queue.push_back(target);
        self.queue.pop_front().expect("queue holds at least the pushed target")
    }
}

#[inline]
pub fn pd_array<T: Real>(model: &Model<T>, target: &[T; NUM_ACTUATED], state: &SimState<T>) -> [T; NUM_ACTUATED] {
    let mut tau = [T::zero(); NUM_ACTUATED];
    for i in 0..NUM_ACTUATED {
        let k = JOINT_OFFSET + i;
        let raw = model.kp[i] * (target[i] - state.q[k]) - model.kd[i] * state.qd[k];
        tau[i] = raw.max(-model.torque_limit[i]).min(model.torque_limit[i]);
    }
    tau
}

/// A single simulated robot: model, integrator and state.
#[derive(Debug, Clone)]
pub struct Simulator<T> {
    pub model: Model<T>,
    pub backend: BackendKind,
    pub state: SimState<T>,
}

impl<T: Real> Simulator<T> {
    pub fn new(model: Model<T>, backend: BackendKind, state: SimState<T>) -> Self {
        Self {
            model,
            backend,
            state,
        }
    }

    pub fn time(&self) -> T {
        T::count(self.state.tick as usize) * T::lit(PHYSICS_DT)
    }

    pub fn step_dynamics(&mut self, joint_torques: &[T; NUM_ACTUATED], disturbance: &ExternalDisturbance<T>) -> Result<()> {
        step_dynamics(
            self.backend,
            &self.model,
            &mut self.state,
            joint_torques,
            disturbance,
            T::lit(PHYSICS_DT),
        )
    }

    /// Runs [`DECIMATION`] PD ticks holding `target`, routed through `delay`.
    /// Torques are scaled by `motor_strength`. Returns the last applied torques.
    pub fn control_substep(
        &mut self,
        target: &[T; NUM_ACTUATED],
        disturbance: &ExternalDisturbance<T>,
        delay: &mut DelayLine<T>,
        motor_strength: T,
    ) -> Result<[T; NUM_ACTUATED]> {
        let mut applied = [T::zero(); NUM_ACTUATED];
        for _ in 0..DECIMATION {
            let effective = delay.push(*target);
            let mut tau = pd_array(&self.model, &effective, &self.state);
            for (t, lim) in tau.iter_mut().zip(self.model.torque_limit.iter()) {
                *t = (*t * motor_strength).max(-*lim).min(*lim);
            }
            self.step_dynamics(&tau, disturbance)?;
            applied = tau;
        }
        Ok(applied)
    }

    pub fn contact_state(&self) -> ContactState<T> {
        self.model.contact_state(&self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delay_is_passthrough() {
        let mut d = DelayLine::new(0, [0.0f64; 6]);
        for i in 0..5 {
            let t = [i as f64; 6];
            assert_eq!(d.push(t), t);
        }
    }

    #[test]
    fn delay_returns_target_from_k_ticks_earlier() {
        let k = 3;
        let mut d = DelayLine::new(k, [-1.0f64; 6]);
        let out: Vec<f64> = (0..10).map(|i| d.push([i as f64; 6])[0]).collect();
        assert_eq!(out, vec![-1.0, -1.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }
}
