//! Command-line front end for bipedlab: training, evaluation and sim-to-sim
//! validation runs driven by a TOML config.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Result;
use bipedlab::model::BackendKind;
use bipedlab::terrain::TerrainKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod config;
mod eval;
mod train;
mod validate;

pub use config::{Resolved, RunConfig, OUT_ENV};
pub use eval::{eval, EvalSummary};
pub use train::{train, TrainReport};
pub use validate::{plot, sine, validate, ValidateReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Fast,
    Reference,
}

impl From<BackendArg> for BackendKind {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Fast => BackendKind::Fast,
            BackendArg::Reference => BackendKind::Reference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TerrainArg {
    Flat,
    Uneven,
}

impl From<TerrainArg> for TerrainKind {
    fn from(t: TerrainArg) -> Self {
        match t {
            TerrainArg::Flat => TerrainKind::Flat,
            TerrainArg::Uneven => TerrainKind::Uneven,
        }
    }
}

/// Planar biped locomotion: train, evaluate and cross-check policies.
#[derive(Debug, Parser)]
#[command(name = "bipedlab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run config; built-in defaults when omitted
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Global seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of parallel training environments
    #[arg(long, value_name = "N")]
    pub envs: Option<usize>,
    /// Training iterations
    #[arg(long, value_name = "N")]
    pub iterations: Option<usize>,
    /// Physics backend
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Terrain used for training and evaluation
    #[arg(long, value_enum)]
    pub terrain: Option<TerrainArg>,
    /// Rollout worker threads (0 = one per core)
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
    /// Output root for train, output directory for the other commands
    #[arg(long, value_name = "DIR", env = OUT_ENV, hide_env_values = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy with PPO; writes a run directory
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Run deterministic episodes with a checkpoint and summarize them
    Eval {
        #[command(flatten)]
        common: Common,
        /// Policy checkpoint written by train
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Number of episodes
        #[arg(long, default_value_t = 10)]
        episodes: usize,
    },
    /// Roll a checkpoint out on several backends and terrains and compare the trajectories
    Validate {
        #[command(flatten)]
        common: Common,
        /// Policy checkpoint written by train
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// Backends to roll out on, comma separated; repeat one for a self-check
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["fast", "reference"])]
        backends: Vec<BackendArg>,
        /// Terrains, comma separated; one plot directory each
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["flat"])]
        terrains: Vec<TerrainArg>,
        /// Forward velocity command in m/s
        #[arg(long)]
        command_vx: Option<f64>,
        /// Rollout length in seconds
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Joint sine-tracking test on each backend
    Sine {
        #[command(flatten)]
        common: Common,
        /// Backends to test, comma separated
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["fast", "reference"])]
        backends: Vec<BackendArg>,
        /// Amplitude in rad
        #[arg(long)]
        amplitude: Option<f64>,
        /// Frequency in Hz
        #[arg(long)]
        frequency: Option<f64>,
        /// Duration in seconds
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Plot trajectory CSVs written by validate or sine
    Plot {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV files; the first is the comparison baseline
        #[arg(required = true, value_name = "CSV")]
        records: Vec<PathBuf>,
        /// Joints to plot; all when omitted
        #[arg(long, value_delimiter = ',')]
        joints: Vec<String>,
    },
}

impl Common {
    /// Loads the config and applies flag overrides.
    pub fn resolve(&self) -> Result<Resolved> {
        let mut r = RunConfig::load(self.config.as_deref())?;
        let c = &mut r.config;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(n) = self.envs {
            c.ppo.num_envs = n;
        }
        if let Some(n) = self.iterations {
            c.train.iterations = n;
        }
        if let Some(b) = self.backend {
            c.backend = b.into();
        }
        if let Some(t) = self.terrain {
            c.env.terrain = t.into();
            c.sim2sim.rollout.terrain = t.into();
        }
        if let Some(w) = self.workers {
            c.ppo.workers = w;
        }
        if let Some(o) = &self.out {
            c.out_dir = o.clone();
        }
        c.validate()?;
        Ok(r)
    }
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train { common } => {
            let r = common.resolve()?;
            train(&r, out)?;
        }
        Command::Eval { common, checkpoint, episodes } => {
            let r = common.resolve()?;
            let summary = eval(&r, &checkpoint, episodes)?;
            write!(out, "{summary}")?;
        }
        Command::Validate {
            common,
            checkpoint,
            backends,
            terrains,
            command_vx,
            duration,
        } => {
            let mut r = common.resolve()?;
            if let Some(v) = command_vx {
                r.config.sim2sim.rollout.command_vx = v;
            }
            if let Some(d) = duration {
                r.config.sim2sim.rollout.duration = d;
            }
            let backends: Vec<BackendKind> = backends.into_iter().map(Into::into).collect();
            let terrains: Vec<TerrainKind> = terrains.into_iter().map(Into::into).collect();
            let dir = r.config.out_dir.clone();
            let report = validate(&r, &checkpoint, &backends, &terrains, &dir)?;
            write!(out, "{report}")?;
        }
        Command::Sine {
            common,
            backends,
            amplitude,
            frequency,
            duration,
        } => {
            let mut r = common.resolve()?;
            let s = &mut r.config.sim2sim.sine;
            if let Some(a) = amplitude {
                s.amplitude = a;
            }
            if let Some(f) = frequency {
                s.frequency = f;
            }
            if let Some(d) = duration {
                s.duration = d;
            }
            let backends: Vec<BackendKind> = backends.into_iter().map(Into::into).collect();
            let dir = r.config.out_dir.clone();
            sine(&r, &backends, &dir, out)?;
        }
        Command::Plot { common, records, joints } => {
            let r = common.resolve()?;
            plot(&records, &joints, &r.config.out_dir, out)?;
        }
    }
    Ok(())
}

pub(crate) fn label_of(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "record".into());
    stem.strip_prefix("record_").map(str::to_string).unwrap_or(stem)
}
