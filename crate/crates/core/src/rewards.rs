//! Locomotion reward suite built on the tracking kernel `φ(e, w) = exp(−w‖e‖²)`.
//!
//! The total is the weighted sum `Σ μᵢ rᵢ` of eleven terms. Raw terms are
//! kept unweighted in [`RewardTerms`]; weights live in [`RewardWeights`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gait::StanceMask;
use crate::model::ContactState;
use crate::scalar::Real;

pub const NUM_TERMS: usize = 11;

/// Stable column names, in term order.
pub const TERM_NAMES: [&str; NUM_TERMS] = [
    "lin_vel_track",
    "ang_vel_track",
    "orientation_track",
    "base_height_track",
    "velocity_mismatch",
    "contact_pattern",
    "joint_pos_track",
    "default_joint",
    "energy_cost",
    "action_smoothness",
    "large_contact",
];

/// Foot force above which the large-contact penalty starts, N.
pub const LARGE_CONTACT_THRESHOLD: f64 = 400.0;
/// Per-foot saturation of the large-contact penalty, N.
pub const LARGE_CONTACT_CAP: f64 = 100.0;

/// `exp(−w ‖e‖²)`.
pub fn phi<T: Real>(e: &[T], w: T) -> Result<T> {
    if !(w >= T::zero()) || e.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("phi requires finite errors and w >= 0"));
    }
    Ok(phi_unchecked(e, w))
}

#[inline]
fn phi_unchecked<T: Real>(e: &[T], w: T) -> T {
    let sq = e.iter().fold(T::zero(), |acc, &v| acc + v * v);
    (-w * sq).exp()
}

/// The `w → ∞` limit of `φ(I_p − I_d, w)`, averaged over the two feet.
pub fn contact_pattern_reward<T: Real>(planned: StanceMask, detected: [bool; 2]) -> T {
    let matches = planned
        .iter()
        .zip(detected.iter())
        .filter(|(p, d)| p == d)
        .count();
    T::count(matches) / T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub lin_vel_track: f64,
    pub ang_vel_track: f64,
    pub orientation_track: f64,
    pub base_height_track: f64,
    pub velocity_mismatch: f64,
    pub contact_pattern: f64,
    pub joint_pos_track: f64,
    pub default_joint: f64,
    pub energy_cost: f64,
    pub action_smoothness: f64,
    pub large_contact: f64,
    /// m
    pub base_height_target: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            lin_vel_track: 1.2,
            ang_vel_track: 1.0,
            orientation_track: 1.0,
            base_height_track: 0.5,
            velocity_mismatch: 0.5,
            contact_pattern: 1.0,
            joint_pos_track: 1.5,
            default_joint: 0.2,
            energy_cost: -0.0001,
            action_smoothness: -0.01,
            large_contact: -0.01,
            base_height_target: 0.7,
        }
    }
}

impl RewardWeights {
    pub fn as_array(&self) -> [f64; NUM_TERMS] {
        [
            self.lin_vel_track,
            self.ang_vel_track,
            self.orientation_track,
            self.base_height_track,
            self.velocity_mismatch,
            self.contact_pattern,
            self.joint_pos_track,
            self.default_joint,
            self.energy_cost,
            self.action_smoothness,
            self.large_contact,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|v| !v.is_finite()) || !self.base_height_target.is_finite() {
            return Err(Error::Config("reward weights must be finite".into()));
        }
        if w[..8].iter().any(|&v| v < 0.0) || w[8..].iter().any(|&v| v > 0.0) {
            return Err(Error::Config(
                "tracking reward weights must be >= 0 and penalty weights <= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Raw (unweighted) reward terms and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTerms<T> {
    pub raw: [T; NUM_TERMS],
    pub weighted: [T; NUM_TERMS],
    pub total: T,
}

impl<T: Real> RewardTerms<T> {
    pub fn from_raw(raw: [T; NUM_TERMS], weights: &RewardWeights) -> Self {
        let mu = weights.as_array();
        let mut weighted = [T::zero(); NUM_TERMS];
        let mut total = T::zero();
        for i in 0..NUM_TERMS {
            weighted[i] = raw[i] * T::lit(mu[i]);
            total = total + weighted[i];
        }
        Self { raw, weighted, total }
    }

    pub fn get(&self, name: &str) -> Option<T> {
        TERM_NAMES.iter().position(|n| *n == name).map(|i| self.weighted[i])
    }
}

/// Everything the reward terms read, gathered from the simulator, gait and
/// policy. Velocities are world frame; the planar model has zero roll/yaw.
#[derive(Debug, Clone)]
pub struct RewardInputs<'a, T> {
    /// `[vx, vy, vz]`, m/s
    pub base_lin_vel: [T; 3],
    /// `[α̇, β̇, γ̇]`, rad/s
    pub base_ang_vel: [T; 3],
    /// `[α, β, γ]`, rad
    pub euler: [T; 3],
    /// m above the terrain
    pub base_height: T,
    /// `[vx, vy, yaw rate]`
    pub command: [T; 3],
    pub theta: &'a [T],
    pub theta_dot: &'a [T],
    pub theta_ref: &'a [T],
    pub theta_default: &'a [T],
    pub torques: &'a [T],
    pub stance_mask: StanceMask,
    pub contact: ContactState<T>,
    pub action: &'a [T],
    pub last_action: &'a [T],
    pub last_last_action: &'a [T],
}

fn diff<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b.iter()).map(|(x, y)| *x - *y).collect()
}

pub fn compute_rewards<T: Real>(inp: &RewardInputs<'_, T>, weights: &RewardWeights) -> Result<RewardTerms<T>> {
    let n = inp.theta.len();
    for (name, len) in [
        ("theta_dot", inp.theta_dot.len()),
        ("theta_ref", inp.theta_ref.len()),
        ("theta_default", inp.theta_default.len()),
        ("torques", inp.torques.len()),
    ] {
        if len != n {
            return Err(Error::contract(format!("compute_rewards: {name} has length {len}, expected {n}")));
        }
    }
    let na = inp.action.len();
    if inp.last_action.len() != na || inp.last_last_action.len() != na {
        return Err(Error::contract("compute_rewards: action history lengths differ"));
    }
    let five = T::lit(5.0);
    let two = T::lit(2.0);
    let cmd_lin = [inp.command[0], inp.command[1], T::zero()];
    let cmd_ang = [T::zero(), T::zero(), inp.command[2]];
    let lin = phi_unchecked(&diff(&inp.base_lin_vel, &cmd_lin), five);
    let ang = phi_unchecked(&diff(&inp.base_ang_vel, &cmd_ang), five);
    let orient = phi_unchecked(&inp.euler[..2], five);
    let height = phi_unchecked(&[inp.base_height - T::lit(weights.base_height_target)], T::lit(100.0));
    // commands for z velocity, yaw rate and pitch rate are fixed at zero
    let mismatch = phi_unchecked(&[inp.base_lin_vel[2], inp.base_ang_vel[2], inp.base_ang_vel[1]], five);
    let contact = contact_pattern_reward(inp.stance_mask, inp.contact.in_contact);
    let joint_track = phi_unchecked(&diff(inp.theta, inp.theta_ref), two);
    let default_joint = phi_unchecked(&diff(inp.theta, inp.theta_default), two);
    let energy = inp
        .torques
        .iter()
        .zip(inp.theta_dot.iter())
        .fold(T::zero(), |acc, (t, w)| acc + t.abs() * w.abs());
    let smooth = (0..na)
        .map(|i| inp.action[i] - two * inp.last_action[i] + inp.last_last_action[i])
        .fold(T::zero(), |acc, v| acc + v * v)
        .sqrt();
    let (thr, cap) = (T::lit(LARGE_CONTACT_THRESHOLD), T::lit(LARGE_CONTACT_CAP));
    let large = inp
        .contact
        .foot_force
        .iter()
        .fold(T::zero(), |acc, f| acc + (*f - thr).max(T::zero()).min(cap));
    let raw = [
        lin, ang, orient, height, mismatch, contact, joint_track, default_joint, energy, smooth, large,
    ];
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("compute_rewards: non-finite input"));
    }
    Ok(RewardTerms::from_raw(raw, weights))
}
