//! Sim-to-sim validation: run a policy or a sine command under both physics
//! backends and quantify how far the resulting trajectories diverge.

pub mod compare;
pub mod plot;
pub mod portrait;
pub mod record;
pub mod sine;

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use compare::{compare_trajectories, portrait_discrepancy, DivergenceReport, PORTRAIT_GRID};
pub use plot::{emit_plots, write_report_csv, PlotStatus};
pub use portrait::{fit_ellipse, phase_portrait, Ellipse, PhasePortrait};
pub use record::{Sample, TrajectoryRecord};
pub use sine::{fit_sine, sine_tracking_test, SineFit, SineOutcome, SineTestConfig};

use crate::env::{Env, EnvSettings, ACTION_DIM, OBS_DIM, PRIV_DIM};
use crate::error::{Error, Result};
use crate::model::{BackendKind, POLICY_DT};
use crate::ppo::{Checkpoint, GaussianPolicy, ObservationBatch};
use crate::terrain::TerrainKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RolloutConfig {
    /// m/s forward command
    pub command_vx: f64,
    /// s
    pub duration: f64,
    pub terrain: TerrainKind,
    pub observation_noise: bool,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            command_vx: 0.5,
            duration: 5.0,
            terrain: TerrainKind::Flat,
            observation_noise: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutOutcome {
    pub record: TrajectoryRecord,
    pub fell: bool,
    pub diverged: bool,
    /// Mode action taken on the first step.
    pub first_action: Vec<f32>,
    pub total_reward: f64,
}

impl RolloutOutcome {
    pub fn completed(&self) -> bool {
        !self.fell && !self.diverged
    }
}

/// Environment settings for evaluation: no dynamics randomization, no pushes,
/// no reset jitter, a fixed command, and the requested terrain.
pub fn evaluation_settings(base: &EnvSettings, cfg: &RolloutConfig) -> EnvSettings {
    let mut s = base.clone();
    s.env.randomization.dynamics = false;
    s.env.randomization.observation_noise = cfg.observation_noise;
    s.env.push.enabled = false;
    s.env.reset_joint_jitter = 0.0;
    s.env.command.fixed_vx = Some(cfg.command_vx);
    s.env.terrain = cfg.terrain;
    s
}

/// Deterministic mode-action rollout of a checkpoint, sampled at 100 Hz.
/// Stops early, flagged, if the robot falls or the simulation diverges.
pub fn rollout_policy(backend: BackendKind, checkpoint: &Checkpoint, base: &EnvSettings, cfg: &RolloutConfig, seed: u64) -> Result<RolloutOutcome> {
    checkpoint.expect_dims(OBS_DIM, ACTION_DIM, PRIV_DIM)?;
    if !(cfg.duration > 0.0) {
        return Err(Error::Config("rollout duration must be > 0".into()));
    }
    let settings = Arc::new(evaluation_settings(base, cfg));
    let mut env = Env::new(settings, backend, seed, 0)?;
    run_policy(&mut env, &checkpoint.policy, cfg.duration)
}

/// Mode action for a single stacked observation.
pub fn policy_action(policy: &GaussianPolicy<f32>, obs: &[f64]) -> Result<Vec<f32>> {
    let row = Array2::from_shape_fn((1, obs.len()), |(_, j)| obs[j] as f32);
    Ok(policy.act_mean(ObservationBatch(row.view()))?.row(0).to_vec())
}

fn run_policy(env: &mut Env, policy: &GaussianPolicy<f32>, duration: f64) -> Result<RolloutOutcome> {
    let steps = (duration / POLICY_DT).round() as usize;
    let mut record = TrajectoryRecord::for_robot();
    let mut first_action = Vec::new();
    let (mut fell, mut diverged, mut total_reward) = (false, false, 0.0);
    for k in 0..steps {
        record.push_state(k as f64 * POLICY_DT, env.simulator());
        let action = policy_action(policy, env.observation())?;
        if k == 0 {
            first_action = action.clone();
        }
        let a: Vec<f64> = action.iter().map(|v| *v as f64).collect();
        let out = env.step(&a)?;
        total_reward += out.rewards.total;
        if out.diverged {
            diverged = true;
            break;
        }
        if out.fell {
            fell = true;
            break;
        }
    }
    Ok(RolloutOutcome {
        record,
        fell,
        diverged,
        first_action,
        total_reward,
    })
}
