use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::gae::gae_advantages;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One horizon of transitions from every environment, stored time-major:
/// row `t * num_envs + e` holds step `t` of environment `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBuffer<T> {
    num_envs: usize,
    horizon: usize,
    len: usize,
    pub observations: Array2<T>,
    pub privileged: Array2<T>,
    pub actions: Array2<T>,
    pub log_probs: Array1<T>,
    pub rewards: Array1<T>,
    pub values: Array1<T>,
    pub dones: Vec<bool>,
    pub advantages: Array1<T>,
    pub returns: Array1<T>,
}

impl<T: Real> RolloutBuffer<T> {
    pub fn new(num_envs: usize, horizon: usize, obs_dim: usize, priv_dim: usize, act_dim: usize) -> Self {
        let n = num_envs * horizon;
        Self {
            num_envs,
            horizon,
            len: 0,
            observations: Array2::zeros((n, obs_dim)),
            privileged: Array2::zeros((n, priv_dim)),
            actions: Array2::zeros((n, act_dim)),
            log_probs: Array1::zeros(n),
            rewards: Array1::zeros(n),
            values: Array1::zeros(n),
            dones: vec![false; n],
            advantages: Array1::zeros(n),
            returns: Array1::zeros(n),
        }
    }

    pub fn num_envs(&self) -> usize {
        self.num_envs
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of filled time steps.
    pub fn steps(&self) -> usize {
        self.len
    }

    pub fn is_full(&self) -> bool {
        self.len == self.horizon
    }

    pub fn clear(&mut self) {
        self.len = 0;
    }

    /// Appends one time step for all environments.
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        obs: ArrayView2<'_, T>,
        privileged: ArrayView2<'_, T>,
        actions: ArrayView2<'_, T>,
        log_probs: ArrayView1<'_, T>,
        rewards: &[T],
        values: ArrayView1<'_, T>,
        dones: &[bool],
    ) -> Result<()> {
        if self.is_full() {
            return Err(Error::contract("rollout buffer is full"));
        }
        let e = self.num_envs;
        if obs.nrows() != e || privileged.nrows() != e || actions.nrows() != e || log_probs.len() != e || rewards.len() != e || values.len() != e || dones.len() != e {
            return Err(Error::contract("every rollout field needs one row per environment"));
        }
        let rows = self.len * e..(self.len + 1) * e;
        self.observations.slice_mut(ndarray::s![rows.clone(), ..]).assign(&obs);
        self.privileged.slice_mut(ndarray::s![rows.clone(), ..]).assign(&privileged);
        self.actions.slice_mut(ndarray::s![rows.clone(), ..]).assign(&actions);
        self.log_probs.slice_mut(ndarray::s![rows.clone()]).assign(&log_probs);
        self.values.slice_mut(ndarray::s![rows.clone()]).assign(&values);
        for (k, i) in rows.enumerate() {
            self.rewards[i] = rewards[k];
            self.dones[i] = dones[k];
        }
        self.len += 1;
        Ok(())
    }

    /// Runs GAE per environment with `last_values` bootstrapping the step after the horizon.
    pub fn compute_returns(&mut self, last_values: &[T], gamma: T, lambda: T) -> Result<()> {
        if !self.is_full() || last_values.len() != self.num_envs {
            return Err(Error::contract("returns need a full buffer and one bootstrap value per environment"));
        }
        let (e, h) = (self.num_envs, self.horizon);
        for env in 0..e {
            let idx = |t: usize| t * e + env;
            let r: Vec<T> = (0..h).map(|t| self.rewards[idx(t)]).collect();
            let mut v: Vec<T> = (0..h).map(|t| self.values[idx(t)]).collect();
            v.push(last_values[env]);
            let d: Vec<bool> = (0..h).map(|t| self.dones[idx(t)]).collect();
            let (adv, ret) = gae_advantages(&r, &v, &d, gamma, lambda)?;
            for t in 0..h {
                self.advantages[idx(t)] = adv[t];
                self.returns[idx(t)] = ret[t];
            }
        }
        Ok(())
    }
}
