//! Joint sine-wave tracking through the PD pipeline.

use serde::{Deserialize, Serialize};

use super::record::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::model::{
    BackendKind, DelayLine, ExternalDisturbance, Model, PhysicsConfig, RobotDescription, Simulator,
    NUM_ACTUATED, POLICY_DT,
};
use crate::terrain::Terrain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SineTestConfig {
    /// rad
    pub amplitude: f64,
    /// Hz
    pub frequency: f64,
    /// s
    pub duration: f64,
    /// Indices of the commanded joints; the others hold the standing pose.
    pub joints: Vec<usize>,
    /// Fixed base, no ground contact. Otherwise the robot stands on flat ground.
    pub suspended: bool,
    /// m, base height when suspended
    pub suspension_height: f64,
}

impl Default for SineTestConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.3,
            frequency: 1.0,
            duration: 5.0,
            joints: (0..NUM_ACTUATED).collect(),
            suspended: true,
            suspension_height: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SineOutcome {
    pub record: TrajectoryRecord,
    /// Set when the simulation diverged; the record stops at the last good sample.
    pub diverged: bool,
}

/// Commands `θ₀ + A sin(2π f t)` on the selected joints at the control rate
/// and records the response at 100 Hz.
pub fn sine_tracking_test(backend: BackendKind, robot: &RobotDescription, physics: &PhysicsConfig, cfg: &SineTestConfig) -> Result<SineOutcome> {
    if !(cfg.duration > 0.0) || !cfg.amplitude.is_finite() || !(cfg.frequency >= 0.0) {
        return Err(Error::Config("sine test needs duration > 0, finite amplitude and frequency >= 0".into()));
    }
    if let Some(j) = cfg.joints.iter().find(|&&j| j >= NUM_ACTUATED) {
        return Err(Error::Config(format!("sine test joint index {j} out of range")));
    }
    let mut physics = physics.clone();
    if cfg.suspended {
        physics.fixed_base = true;
        physics.contact_enabled = false;
    }
    let model = Model::new(robot, &physics, Terrain::Flat)?;
    let pose = model.standing_pose;
    let mut state = model.standing_state(0.0, &pose);
    if cfg.suspended {
        state.q[1] = cfg.suspension_height;
    }
    let mut sim = Simulator::new(model, backend, state);
    let mut delay = DelayLine::new(0, pose);
    let none = ExternalDisturbance::none();
    let steps = (cfg.duration / POLICY_DT).round() as usize;
    let mut record = TrajectoryRecord::for_robot();
    let w = 2.0 * std::f64::consts::PI * cfg.frequency;
    for k in 0..steps {
        let t = k as f64 * POLICY_DT;
        record.push_state(t, &sim);
        let mut target = pose;
        for &j in &cfg.joints {
            target[j] += cfg.amplitude * (w * t).sin();
        }
        match sim.control_substep(&target, &none, &mut delay, 1.0) {
            Ok(_) => {}
            Err(Error::Diverged { .. }) => return Ok(SineOutcome { record, diverged: true }),
            Err(e) => return Err(e),
        }
    }
    Ok(SineOutcome { record, diverged: false })
}

/// Steady-state response of one joint to a sine of known frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineFit {
    /// Fitted amplitude divided by the commanded amplitude.
    pub amplitude_ratio: f64,
    /// s, positive when the response trails the command
    pub lag: f64,
    /// rad, fitted mean
    pub offset: f64,
}

/// Least-squares fit of `c + a sin(ωt) + b cos(ωt)` to a joint over samples with `t >= settle`.
pub fn fit_sine(record: &TrajectoryRecord, joint: usize, amplitude: f64, frequency: f64, settle: f64) -> Result<SineFit> {
    if !(frequency > 0.0 && amplitude != 0.0) {
        return Err(Error::contract("sine fit needs a nonzero amplitude and positive frequency"));
    }
    let w = 2.0 * std::f64::consts::PI * frequency;
    // normal equations for the three basis functions
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    let mut n = 0;
    for s in record.samples.iter().filter(|s| s.t >= settle) {
        let basis = [1.0, (w * s.t).sin(), (w * s.t).cos()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += basis[i] * basis[j];
            }
            atb[i] += basis[i] * s.theta[joint];
        }
        n += 1;
    }
    if n < 3 {
        return Err(Error::contract("not enough samples after the settling time"));
    }
    let x = solve3(ata, atb).ok_or_else(|| Error::contract("degenerate sine fit"))?;
    let (c, a, b) = (x[0], x[1], x[2]);
    // a sin + b cos = R sin(ωt + φ) with φ = atan2(b, a); a lag is φ < 0
    let phase = b.atan2(a);
    Ok(SineFit {
        amplitude_ratio: (a * a + b * b).sqrt() / amplitude.abs(),
        lag: -phase / w,
        offset: c,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
