use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::terrain::TerrainKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommandConfig {
    /// m/s
    pub vx_min: f64,
    /// m/s
    pub vx_max: f64,
    /// When set, every episode uses this forward velocity instead of sampling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_vx: Option<f64>,
}

impl Default for CommandConfig {
    fn default() -> Self {
        Self {
            vx_min: -0.5,
            vx_max: 1.0,
            fixed_vx: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PushConfig {
    pub enabled: bool,
    /// s between push onsets, uniform in [interval_min, interval_max]
    pub interval_min: f64,
    pub interval_max: f64,
    /// s
    pub duration: f64,
    /// N, horizontal push magnitude bound
    pub max_force: f64,
    /// N·m, pitch torque magnitude bound
    pub max_torque: f64,
}

impl Default for PushConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            interval_min: 4.0,
            interval_max: 8.0,
            duration: 0.2,
            max_force: 50.0,
            max_torque: 10.0,
        }
    }
}

/// Randomization ranges. Gaussian terms use the half-width as one standard
/// deviation around the center and are truncated to the range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizationConfig {
    /// Per-episode dynamics randomization (friction, motor strength, payload, delay).
    pub dynamics: bool,
    /// Per-step additive sensor noise on the policy observation.
    pub observation_noise: bool,
    pub friction: [f64; 2],
    /// multiplicative torque scale
    pub motor_strength: [f64; 2],
    /// kg added to the torso
    pub payload: [f64; 2],
    /// ms, uniform, quantized to 1 kHz ticks
    pub delay_ms: [f64; 2],
    /// rad
    pub joint_pos_noise: f64,
    /// rad/s
    pub joint_vel_noise: f64,
    /// rad/s
    pub ang_vel_noise: f64,
    /// rad
    pub euler_noise: f64,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        Self {
            dynamics: true,
            observation_noise: true,
            friction: [0.1, 2.0],
            motor_strength: [0.95, 1.05],
            payload: [-5.0, 5.0],
            delay_ms: [0.0, 10.0],
            joint_pos_noise: 0.05,
            joint_vel_noise: 0.5,
            ang_vel_noise: 0.1,
            euler_noise: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    /// rad per unit action
    pub action_scale: f64,
    /// actions are clipped to ±action_clip before use
    pub action_clip: f64,
    /// policy steps per episode
    pub episode_length: usize,
    /// m, terminate below this base height
    pub min_base_height: f64,
    /// rad, terminate beyond this torso pitch
    pub max_pitch: f64,
    /// rad, uniform jitter added to the standing pose at reset
    pub reset_joint_jitter: f64,
    pub terrain: TerrainKind,
    pub command: CommandConfig,
    pub push: PushConfig,
    pub randomization: RandomizationConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            action_scale: 0.25,
            action_clip: 4.0,
            episode_length: 2400,
            min_base_height: 0.4,
            max_pitch: 1.0,
            reset_joint_jitter: 0.02,
            terrain: TerrainKind::Flat,
            command: CommandConfig::default(),
            push: PushConfig::default(),
            randomization: RandomizationConfig::default(),
        }
    }
}

fn range_ok(name: &str, r: [f64; 2]) -> Result<()> {
    if r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be a finite [min, max] range")))
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.action_scale.is_finite() && self.action_scale >= 0.0) {
            return Err(Error::Config("env.action_scale must be >= 0".into()));
        }
        if !(self.action_clip > 0.0) {
            return Err(Error::Config("env.action_clip must be > 0".into()));
        }
        if self.episode_length == 0 {
            return Err(Error::Config("env.episode_length must be > 0".into()));
        }
        if !(self.reset_joint_jitter >= 0.0) {
            return Err(Error::Config("env.reset_joint_jitter must be >= 0".into()));
        }
        range_ok("env.command.vx", [self.command.vx_min, self.command.vx_max])?;
        let p = &self.push;
        range_ok("env.push.interval", [p.interval_min, p.interval_max])?;
        if !(p.interval_min > 0.0 && p.duration >= 0.0 && p.max_force >= 0.0 && p.max_torque >= 0.0) {
            return Err(Error::Config("env.push values must be non-negative with interval_min > 0".into()));
        }
        let r = &self.randomization;
        range_ok("env.randomization.friction", r.friction)?;
        range_ok("env.randomization.motor_strength", r.motor_strength)?;
        range_ok("env.randomization.payload", r.payload)?;
        range_ok("env.randomization.delay_ms", r.delay_ms)?;
        if r.friction[0] < 0.0 || r.delay_ms[0] < 0.0 || r.motor_strength[0] <= 0.0 {
            return Err(Error::Config("env.randomization ranges out of physical bounds".into()));
        }
        for v in [r.joint_pos_noise, r.joint_vel_noise, r.ang_vel_noise, r.euler_noise] {
            if !(v >= 0.0) {
                return Err(Error::Config("env.randomization noise levels must be >= 0".into()));
            }
        }
        Ok(())
    }
}
