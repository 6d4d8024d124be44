//! Run configuration: one TOML document covering every module.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bipedlab::env::{EnvConfig, EnvSettings};
use bipedlab::gait::GaitConfig;
use bipedlab::model::{BackendKind, PhysicsConfig, RobotDescription};
use bipedlab::ppo::PpoConfig;
use bipedlab::rewards::RewardWeights;
use bipedlab::sim2sim::{RolloutConfig, SineTestConfig};
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the output root.
pub const OUT_ENV: &str = "BIPEDLAB_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub iterations: usize,
    /// Save a checkpoint every this many iterations.
    pub checkpoint_interval: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            iterations: 300,
            checkpoint_interval: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sim2SimSection {
    pub rollout: RolloutConfig,
    pub sine: SineTestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub backend: BackendKind,
    /// Root directory for run directories.
    pub out_dir: PathBuf,
    /// Robot description file, relative to the config file. The built-in robot when absent.
    pub robot_file: Option<PathBuf>,
    pub train: TrainSection,
    pub physics: PhysicsConfig,
    pub gait: GaitConfig,
    pub env: EnvConfig,
    pub rewards: RewardWeights,
    pub ppo: PpoConfig,
    pub sim2sim: Sim2SimSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            backend: BackendKind::Fast,
            out_dir: PathBuf::from("runs"),
            robot_file: None,
            train: TrainSection::default(),
            physics: PhysicsConfig::default(),
            gait: GaitConfig::default(),
            env: EnvConfig::default(),
            rewards: RewardWeights::default(),
            ppo: PpoConfig::default(),
            sim2sim: Sim2SimSection::default(),
        }
    }
}

/// A parsed config together with the robot it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: RunConfig,
    pub robot: RobotDescription,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Loads `path`, or the built-in defaults for `None` or the literal `default`.
    pub fn load(path: Option<&Path>) -> Result<Resolved> {
        let Some(path) = path.filter(|p| p.as_os_str() != "default") else {
            let config = RunConfig::default();
            return Ok(Resolved {
                robot: RobotDescription::default(),
                config,
            });
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config = Self::from_toml_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let robot = match &config.robot_file {
            None => RobotDescription::default(),
            Some(rel) => {
                let full = path.parent().unwrap_or(Path::new(".")).join(rel);
                RobotDescription::load(&full).with_context(|| format!("loading robot description {}", full.display()))?
            }
        };
        Ok(Resolved { config, robot })
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        self.gait.validate()?;
        self.env.validate()?;
        self.rewards.validate()?;
        self.ppo.validate()?;
        if self.train.checkpoint_interval == 0 {
            bail!("train.checkpoint_interval must be > 0");
        }
        Ok(())
    }
}

impl Resolved {
    pub fn env_settings(&self) -> EnvSettings {
        let c = &self.config;
        EnvSettings {
            robot: self.robot.clone(),
            physics: c.physics.clone(),
            gait: c.gait.clone(),
            env: c.env.clone(),
            rewards: c.rewards.clone(),
        }
    }

    /// Writes `config.toml` and `robot.toml` so the directory reproduces the run.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let mut config = self.config.clone();
        config.robot_file = Some(PathBuf::from("robot.toml"));
        std::fs::write(dir.join("robot.toml"), self.robot.to_toml_string())
            .with_context(|| format!("writing {}", dir.join("robot.toml").display()))?;
        std::fs::write(dir.join("config.toml"), config.to_toml_string())
            .with_context(|| format!("writing {}", dir.join("config.toml").display()))?;
        Ok(())
    }
}
