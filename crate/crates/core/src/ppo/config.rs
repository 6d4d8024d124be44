use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub entropy_coef: f64,
    /// lower ratio bound of the clipped surrogate
    pub clip_low: f64,
    /// upper ratio bound of the clipped surrogate
    pub clip_high: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub epochs: usize,
    pub num_envs: usize,
    pub horizon: usize,
    pub minibatches: usize,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub normalize_advantages: bool,
    /// Standardize actor and critic inputs with running statistics.
    pub normalize_inputs: bool,
    /// Let the critic predict standardized returns.
    pub normalize_values: bool,
    /// When false the log-std parameters receive no updates.
    pub learn_std: bool,
    pub init_std: f64,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    /// Rollout worker threads; 0 uses one per core.
    pub workers: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.994,
            gae_lambda: 0.95,
            entropy_coef: 0.001,
            clip_low: 0.8,
            clip_high: 1.2,
            learning_rate: 1e-5,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            epochs: 2,
            num_envs: 256,
            horizon: 24,
            minibatches: 4,
            value_coef: 1.0,
            max_grad_norm: 1.0,
            normalize_advantages: true,
            normalize_inputs: true,
            normalize_values: true,
            learn_std: true,
            init_std: 0.8,
            actor_hidden: vec![512, 256, 128],
            critic_hidden: vec![512, 256, 128],
            workers: 0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("ppo.{m}")));
        if !(self.clip_low > 0.0 && self.clip_low < 1.0 && self.clip_high > 1.0) {
            return bad("clip bounds must satisfy 0 < clip_low < 1 < clip_high");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must be in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if self.num_envs == 0 || self.horizon == 0 || self.epochs == 0 || self.minibatches == 0 {
            return bad("num_envs, horizon, epochs and minibatches must be > 0");
        }
        if self.minibatches > self.num_envs * self.horizon {
            return bad("minibatches exceeds the batch size");
        }
        if !(self.entropy_coef >= 0.0 && self.value_coef >= 0.0 && self.max_grad_norm > 0.0 && self.init_std > 0.0) {
            return bad("entropy_coef and value_coef must be >= 0; max_grad_norm and init_std > 0");
        }
        if self.actor_hidden.contains(&0) || self.critic_hidden.contains(&0) {
            return bad("hidden layer widths must be > 0");
        }
        Ok(())
    }

    pub fn batch_size(&self) -> usize {
        self.num_envs * self.horizon
    }
}
