//! Gait clock, periodic stance mask and sinusoidal swing reference.
//!
//! One cycle of length `C_T` is split, in normalized phase `φ ∈ [0, 1)`, into
//! double support `[0, d)`, left swing `[d, ½)`, double support `[½, ½+d)`
//! and right swing `[½+d, 1)`, with `d` the double-support fraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NUM_ACTUATED;
use crate::scalar::Real;

/// Swing bump amplitudes, rad. Signs follow joint conventions: the hip flexes
/// forward (negative), the knee flexes (positive), and the ankle dorsiflexes
/// (negative) so the foot stays level when `hip + knee + ankle = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwingAmplitudes {
    pub hip_pitch: f64,
    pub knee: f64,
    pub ankle_pitch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitConfig {
    /// s, one full gait cycle
    pub cycle_time: f64,
    /// fraction of the cycle spent in each of the two double-support phases
    pub ds_fraction: f64,
    pub amplitude: SwingAmplitudes,
}

impl Default for GaitConfig {
    fn default() -> Self {
        Self {
            cycle_time: 0.64,
            ds_fraction: 0.1,
            amplitude: SwingAmplitudes {
                hip_pitch: 0.35,
                knee: 0.6,
                ankle_pitch: 0.25,
            },
        }
    }
}

impl GaitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cycle_time.is_finite() && self.cycle_time > 0.0) {
            return Err(Error::Config(format!(
                "gait.cycle_time must be > 0, got {}",
                self.cycle_time
            )));
        }
        if !(self.ds_fraction >= 0.0 && 2.0 * self.ds_fraction < 1.0) {
            return Err(Error::Config(format!(
                "gait.ds_fraction must lie in [0, 0.5), got {}",
                self.ds_fraction
            )));
        }
        let a = &self.amplitude;
        if ![a.hip_pitch, a.knee, a.ankle_pitch].iter().all(|v| v.is_finite()) {
            return Err(Error::Config("gait.amplitude entries must be finite".into()));
        }
        Ok(())
    }

    /// Per-joint signed swing offsets for one leg: hip, knee, ankle.
    fn leg_offsets<T: Real>(&self) -> [T; 3] {
        let a = &self.amplitude;
        [T::lit(-a.hip_pitch), T::lit(a.knee), T::lit(-a.ankle_pitch)]
    }
}

/// Planned contact per foot `[left, right]`; `true` is stance.
pub type StanceMask = [bool; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct GaitPhase<T> {
    pub phase: T,
    pub clock: (T, T),
    pub stance_mask: StanceMask,
    /// Reference joint targets in actuated-joint order.
    pub theta_ref: [T; NUM_ACTUATED],
}

/// `[sin(2πt/C_T), cos(2πt/C_T)]`.
pub fn clock_signal<T: Real>(t: T, cycle_time: T) -> Result<(T, T)> {
    if !(cycle_time > T::zero()) {
        return Err(Error::Config(format!("cycle time must be > 0, got {cycle_time}")));
    }
    let arg = T::TAU() * t / cycle_time;
    Ok(arg.sin_cos())
}

/// Normalized phase `frac(t / C_T)` in `[0, 1)`.
pub fn normalized_phase<T: Real>(t: T, cycle_time: T) -> T {
    let u = t / cycle_time;
    let phi = u - u.floor();
    if phi >= T::one() {
        T::zero()
    } else {
        phi
    }
}

pub fn stance_mask<T: Real>(t: T, cfg: &GaitConfig) -> StanceMask {
    mask_at_phase(normalized_phase(t, T::lit(cfg.cycle_time)), T::lit(cfg.ds_fraction))
}

fn mask_at_phase<T: Real>(phi: T, d: T) -> StanceMask {
    let half = T::lit(0.5);
    if phi < d {
        [true, true]
    } else if phi < half {
        [false, true]
    } else if phi < half + d {
        [true, true]
    } else {
        [true, false]
    }
}

/// Swing progress of each leg in `[0, 1]`, or `None` while the leg is in stance.
fn swing_progress<T: Real>(phi: T, d: T) -> [Option<T>; 2] {
    let half = T::lit(0.5);
    let window = half - d;
    let left = (phi >= d && phi < half).then(|| (phi - d) / window);
    let right = (phi >= half + d).then(|| (phi - half - d) / window);
    [left, right]
}

/// Reference joint targets: `θ₀` in stance, `θ₀` plus a half-sine bump in swing.
pub fn reference_motion<T: Real>(
    t: T,
    cfg: &GaitConfig,
    standing_pose: &[T; NUM_ACTUATED],
) -> [T; NUM_ACTUATED] {
    let phi = normalized_phase(t, T::lit(cfg.cycle_time));
    reference_at_phase(phi, cfg, standing_pose)
}

fn reference_at_phase<T: Real>(
    phi: T,
    cfg: &GaitConfig,
    standing_pose: &[T; NUM_ACTUATED],
) -> [T; NUM_ACTUATED] {
    let mut out = *standing_pose;
    let offsets = cfg.leg_offsets::<T>();
    for (leg, progress) in swing_progress(phi, T::lit(cfg.ds_fraction)).into_iter().enumerate() {
        if let Some(p) = progress {
            let bump = (T::PI() * p).sin();
            for (j, off) in offsets.iter().enumerate() {
                out[3 * leg + j] = out[3 * leg + j] + *off * bump;
            }
        }
    }
    out
}

pub fn gait_phase<T: Real>(
    t: T,
    cfg: &GaitConfig,
    standing_pose: &[T; NUM_ACTUATED],
) -> Result<GaitPhase<T>> {
    let ct = T::lit(cfg.cycle_time);
    let clock = clock_signal(t, ct)?;
    let phase = normalized_phase(t, ct);
    Ok(GaitPhase {
        phase,
        clock,
        stance_mask: mask_at_phase(phase, T::lit(cfg.ds_fraction)),
        theta_ref: reference_at_phase(phase, cfg, standing_pose),
    })
}
