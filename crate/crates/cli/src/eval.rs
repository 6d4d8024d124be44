use std::fmt;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use bipedlab::env::{Env, ACTION_DIM, OBS_DIM, PRIV_DIM};
use bipedlab::ppo::Checkpoint;
use bipedlab::rewards::{NUM_TERMS, TERM_NAMES};
use bipedlab::sim2sim::policy_action;

use crate::config::Resolved;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub episodes: usize,
    pub mean_return: f64,
    pub mean_length: f64,
    /// Fraction of episodes ending in a fall or divergence.
    pub fall_rate: f64,
    /// Weighted per-term means over every step taken.
    pub term_means: [f64; NUM_TERMS],
}

impl fmt::Display for EvalSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "episodes      {}", self.episodes)?;
        if self.episodes == 0 {
            return Ok(());
        }
        writeln!(f, "mean return   {:.4}", self.mean_return)?;
        writeln!(f, "mean length   {:.1}", self.mean_length)?;
        writeln!(f, "fall rate     {:.3}", self.fall_rate)?;
        for (name, v) in TERM_NAMES.iter().zip(&self.term_means) {
            writeln!(f, "  {name:<22} {v:>10.5}")?;
        }
        Ok(())
    }
}

/// Mode-action episodes under the training environment settings. Episode `i`
/// uses environment stream `i` of the configured seed.
pub fn eval(r: &Resolved, checkpoint: &Path, episodes: usize) -> Result<EvalSummary> {
    let ckpt = Checkpoint::load(checkpoint).with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    ckpt.expect_dims(OBS_DIM, ACTION_DIM, PRIV_DIM)?;
    let settings = Arc::new(r.env_settings());
    let (mut ret, mut len, mut falls, mut steps) = (0.0, 0usize, 0usize, 0usize);
    let mut terms = [0.0; NUM_TERMS];
    for i in 0..episodes {
        let mut env = Env::new(settings.clone(), r.config.backend, r.config.seed, i as u64)?;
        loop {
            let action: Vec<f64> = policy_action(&ckpt.policy, env.observation())?.into_iter().map(f64::from).collect();
            let o = env.step(&action)?;
            steps += 1;
            for (t, w) in terms.iter_mut().zip(&o.rewards.weighted) {
                *t += w;
            }
            if o.done {
                ret += o.episode_return;
                len += o.episode_length;
                if o.fell || o.diverged {
                    falls += 1;
                }
                break;
            }
        }
    }
    let n = episodes.max(1) as f64;
    Ok(EvalSummary {
        episodes,
        mean_return: ret / n,
        mean_length: len as f64 / n,
        fall_rate: falls as f64 / n,
        term_means: terms.map(|t| t / steps.max(1) as f64),
    })
}
