//! Per-episode dynamics draws and per-step observation noise.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::RandomizationConfig;
use crate::model::PHYSICS_DT;

/// Gaussian centered on the range with the half-width as σ, truncated to the range
/// by rejection.
pub fn truncated_gaussian<R: Rng + ?Sized>(rng: &mut R, range: [f64; 2]) -> f64 {
    let center = 0.5 * (range[0] + range[1]);
    let sigma = 0.5 * (range[1] - range[0]);
    if sigma == 0.0 {
        return center;
    }
    let normal = Normal::new(center, sigma).expect("positive sigma");
    loop {
        let v = normal.sample(rng);
        if v >= range[0] && v <= range[1] {
            return v;
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..=range[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizationDraw {
    pub friction: f64,
    pub motor_strength: f64,
    /// kg added to the torso
    pub payload: f64,
    /// 1 kHz ticks of action delay
    pub delay_ticks: usize,
}

impl RandomizationDraw {
    /// No randomization: the given nominal friction, unit strength, no payload, no delay.
    pub fn nominal(friction: f64) -> Self {
        Self {
            friction,
            motor_strength: 1.0,
            payload: 0.0,
            delay_ticks: 0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomizationConfig) -> Self {
        let friction = uniform(rng, cfg.friction);
        let motor_strength = truncated_gaussian(rng, cfg.motor_strength);
        let payload = truncated_gaussian(rng, cfg.payload);
        let delay_ms = uniform(rng, cfg.delay_ms);
        Self {
            friction,
            motor_strength,
            payload,
            delay_ticks: delay_ticks(delay_ms),
        }
    }
}

/// Rounds a delay in ms to whole physics ticks.
pub fn delay_ticks(ms: f64) -> usize {
    (ms * 1e-3 / PHYSICS_DT).round().max(0.0) as usize
}

/// Additive noise for one observation frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationNoise<const N: usize> {
    pub joint_pos: [f64; N],
    pub joint_vel: [f64; N],
    pub ang_vel: [f64; 3],
    pub euler: [f64; 3],
}

impl<const N: usize> ObservationNoise<N> {
    pub fn zero() -> Self {
        Self {
            joint_pos: [0.0; N],
            joint_vel: [0.0; N],
            ang_vel: [0.0; 3],
            euler: [0.0; 3],
        }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomizationConfig) -> Self {
        let sym = |rng: &mut R, s: f64| truncated_gaussian(rng, [-s, s]);
        let mut n = Self::zero();
        for v in n.joint_pos.iter_mut() {
            *v = sym(rng, cfg.joint_pos_noise);
        }
        for v in n.joint_vel.iter_mut() {
            *v = sym(rng, cfg.joint_vel_noise);
        }
        for v in n.ang_vel.iter_mut() {
            *v = sym(rng, cfg.ang_vel_noise);
        }
        for v in n.euler.iter_mut() {
            *v = sym(rng, cfg.euler_noise);
        }
        n
    }
}
