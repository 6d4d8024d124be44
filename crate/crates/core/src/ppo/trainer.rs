//! Rollout collection and the training loop.

use std::collections::VecDeque;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::buffer::RolloutBuffer;
use super::checkpoint::Checkpoint;
use super::config::PpoConfig;
use super::policy::{GaussianPolicy, ObservationBatch, PrivilegedBatch, ValueFunction};
use super::update::{ppo_update, Optimizers, UpdateStats};
use crate::env::{Env, EnvSettings, ACTION_DIM, OBS_DIM, PRIV_DIM};
use crate::error::{Error, Result};
use crate::model::BackendKind;
use crate::rewards::{NUM_TERMS, TERM_NAMES};

/// Completed episodes kept for the rolling return and length means.
pub const EPISODE_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationMetrics {
    pub iteration: usize,
    /// Rolling mean return of the last completed episodes; NaN before any finish.
    pub mean_return: f64,
    pub mean_episode_length: f64,
    pub completed_episodes: usize,
    pub mean_step_reward: f64,
    /// Weighted per-term means over this iteration's transitions.
    pub term_means: [f64; NUM_TERMS],
    pub action_std: f64,
    pub update: UpdateStats,
}

impl IterationMetrics {
    pub fn csv_header() -> Vec<String> {
        let mut h: Vec<String> = ["iteration", "mean_return", "mean_episode_length", "completed_episodes", "mean_step_reward"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend(TERM_NAMES.iter().map(|t| format!("reward_{t}")));
        h.extend(
            [
                "policy_loss",
                "value_loss",
                "entropy",
                "approx_kl",
                "clip_fraction",
                "grad_norm",
                "action_std",
                "skipped_steps",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let u = &self.update;
        let mut r = vec![
            self.iteration.to_string(),
            self.mean_return.to_string(),
            self.mean_episode_length.to_string(),
            self.completed_episodes.to_string(),
            self.mean_step_reward.to_string(),
        ];
        r.extend(self.term_means.iter().map(|v| v.to_string()));
        for v in [u.policy_loss, u.value_loss, u.entropy, u.approx_kl, u.clip_fraction, u.grad_norm, self.action_std] {
            r.push(v.to_string());
        }
        r.push(u.steps_skipped.to_string());
        r
    }
}

/// Appends [`IterationMetrics`] rows to a CSV file.
pub struct MetricsWriter {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl MetricsWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer
            .write_record(IterationMetrics::csv_header())
            .map_err(|e| Error::Csv { path: path.clone(), source: e })?;
        Ok(Self { path, writer })
    }

    pub fn write(&mut self, m: &IterationMetrics) -> Result<()> {
        self.writer
            .write_record(m.csv_row())
            .map_err(|e| Error::Csv { path: self.path.clone(), source: e })?;
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

struct StepResult {
    reward: f64,
    terms: [f64; NUM_TERMS],
    done: bool,
    /// Privileged stack at a timeout, for bootstrapping the cut-off return.
    timeout_state: Option<Vec<f64>>,
    finished: Option<(f64, usize)>,
}

fn to_f32_rows<'a>(rows: impl Iterator<Item = &'a [f64]>, n: usize, width: usize) -> Array2<f32> {
    let mut out = Array2::zeros((n, width));
    for (mut dst, src) in out.rows_mut().into_iter().zip(rows) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = *s as f32;
        }
    }
    out
}

pub struct Trainer {
    cfg: PpoConfig,
    envs: Vec<Env>,
    policy: GaussianPolicy<f32>,
    value: ValueFunction<f32>,
    opt: Optimizers<f32>,
    buffer: RolloutBuffer<f32>,
    rng: ChaCha8Rng,
    pool: rayon::ThreadPool,
    iteration: usize,
    returns: VecDeque<f64>,
    lengths: VecDeque<usize>,
}

impl Trainer {
    /// Environment `i` draws from the stream for `(seed, i)`; network
    /// initialization, exploration noise and minibatch order use a separate
    /// stream, so results depend on the seed and env count but not on `cfg.workers`.
    pub fn new(cfg: PpoConfig, settings: Arc<EnvSettings>, backend: BackendKind, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let envs = (0..cfg.num_envs as u64)
            .map(|i| Env::new(settings.clone(), backend, seed, i))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let policy = GaussianPolicy::new(OBS_DIM, &cfg.actor_hidden, ACTION_DIM, cfg.init_std, &mut rng)?;
        let value = ValueFunction::new(PRIV_DIM, &cfg.critic_hidden, &mut rng)?;
        let opt = Optimizers::new(&cfg, &policy, &value);
        let buffer = RolloutBuffer::new(cfg.num_envs, cfg.horizon, OBS_DIM, PRIV_DIM, ACTION_DIM);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            cfg,
            envs,
            policy,
            value,
            opt,
            buffer,
            rng,
            pool,
            iteration: 0,
            returns: VecDeque::new(),
            lengths: VecDeque::new(),
        })
    }

    pub fn config(&self) -> &PpoConfig {
        &self.cfg
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn policy(&self) -> &GaussianPolicy<f32> {
        &self.policy
    }

    pub fn value(&self) -> &ValueFunction<f32> {
        &self.value
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(self.iteration as u64, &self.policy, &self.value)
    }

    fn observations(&self) -> Array2<f32> {
        to_f32_rows(self.envs.iter().map(|e| e.observation()), self.envs.len(), OBS_DIM)
    }

    fn privileged(&self) -> Array2<f32> {
        to_f32_rows(self.envs.iter().map(|e| e.privileged()), self.envs.len(), PRIV_DIM)
    }

    /// Collects one horizon of experience and runs the update.
    pub fn iterate(&mut self) -> Result<IterationMetrics> {
        let n = self.envs.len();
        let gamma = self.cfg.gamma as f32;
        let mut term_sums = [0.0; NUM_TERMS];
        let mut reward_sum = 0.0;
        let mut completed = 0;
        self.buffer.clear();

        for _ in 0..self.cfg.horizon {
            let obs = self.observations();
            let prv = self.privileged();
            if self.cfg.normalize_inputs {
                self.policy.obs_norm.update(obs.view());
                self.value.state_norm.update(prv.view());
            }
            let mean = self.policy.act_mean(ObservationBatch(obs.view()))?;
            let (actions, log_probs) = self.policy.sample(&mean, &mut self.rng);
            let values = self.value.values(PrivilegedBatch(prv.view()))?;

            let action_rows: Vec<[f64; ACTION_DIM]> = actions
                .rows()
                .into_iter()
                .map(|r| std::array::from_fn(|j| r[j] as f64))
                .collect();
            let envs = &mut self.envs;
            let results: Vec<Result<StepResult>> = self.pool.install(|| {
                envs.par_iter_mut()
                    .zip(action_rows.par_iter())
                    .map(|(env, a)| {
                        let out = env.step(a)?;
                        let timeout_state = out.timeout.then(|| env.privileged().to_vec());
                        let finished = out.done.then_some((out.episode_return, out.episode_length));
                        if out.done {
                            env.reset_episode();
                        }
                        Ok(StepResult {
                            reward: out.rewards.total,
                            terms: out.rewards.weighted,
                            done: out.done,
                            timeout_state,
                            finished,
                        })
                    })
                    .collect()
            });
            let results = results.into_iter().collect::<Result<Vec<_>>>()?;

            let mut rewards: Vec<f32> = results.iter().map(|r| r.reward as f32).collect();
            let dones: Vec<bool> = results.iter().map(|r| r.done).collect();
            let timeouts: Vec<usize> = (0..n).filter(|&i| results[i].timeout_state.is_some()).collect();
            if !timeouts.is_empty() {
                let states = to_f32_rows(
                    timeouts.iter().map(|&i| results[i].timeout_state.as_deref().expect("filtered")),
                    timeouts.len(),
                    PRIV_DIM,
                );
                let v = self.value.values(PrivilegedBatch(states.view()))?;
                for (k, &i) in timeouts.iter().enumerate() {
                    rewards[i] += gamma * v[k];
                }
            }
            for r in &results {
                reward_sum += r.reward;
                for (s, t) in term_sums.iter_mut().zip(&r.terms) {
                    *s += t;
                }
                if let Some((ret, len)) = r.finished {
                    completed += 1;
                    self.returns.push_back(ret);
                    self.lengths.push_back(len);
                    if self.returns.len() > EPISODE_WINDOW {
                        self.returns.pop_front();
                        self.lengths.pop_front();
                    }
                }
            }
            self.buffer.push(obs.view(), prv.view(), actions.view(), log_probs.view(), &rewards, values.view(), &dones)?;
        }

        let last: Array1<f32> = self.value.values(PrivilegedBatch(self.privileged().view()))?;
        self.buffer
            .compute_returns(last.as_slice().expect("contiguous"), gamma, self.cfg.gae_lambda as f32)?;
        if self.cfg.normalize_values {
            let returns = self.buffer.returns.view().insert_axis(ndarray::Axis(1));
            self.value.return_norm.update(returns);
        }
        let update = ppo_update(&self.cfg, &mut self.policy, &mut self.value, &mut self.opt, &self.buffer, &mut self.rng)?;
        self.iteration += 1;

        let transitions = (n * self.cfg.horizon) as f64;
        let mean_of = |v: &VecDeque<f64>| {
            if v.is_empty() {
                f64::NAN
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        let lengths: VecDeque<f64> = self.lengths.iter().map(|&l| l as f64).collect();
        Ok(IterationMetrics {
            iteration: self.iteration,
            mean_return: mean_of(&self.returns),
            mean_episode_length: mean_of(&lengths),
            completed_episodes: completed,
            mean_step_reward: reward_sum / transitions,
            term_means: term_sums.map(|s| s / transitions),
            action_std: self.policy.log_std.iter().map(|l| l.exp() as f64).sum::<f64>() / ACTION_DIM as f64,
            update,
        })
    }
}
