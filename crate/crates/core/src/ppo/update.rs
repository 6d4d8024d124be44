//! One PPO update over a filled rollout buffer.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use super::adam::Adam;
use super::buffer::RolloutBuffer;
use super::config::PpoConfig;
use super::gae::{clipped_objective, normalize_advantages};
use super::policy::{GaussianPolicy, ObservationBatch, PrivilegedBatch, ValueFunction};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Means over the minibatch steps actually taken.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
    pub steps_taken: usize,
    pub steps_skipped: usize,
}

/// Optimizer state for both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizers<T> {
    pub policy: Adam<T>,
    pub value: Adam<T>,
}

impl<T: Real> Optimizers<T> {
    pub fn new(cfg: &PpoConfig, policy: &GaussianPolicy<T>, value: &ValueFunction<T>) -> Self {
        let mk = |n| Adam::new(n, T::lit(cfg.learning_rate), T::lit(cfg.adam_beta1), T::lit(cfg.adam_beta2), T::lit(cfg.adam_eps));
        Self {
            policy: mk(policy.num_params()),
            value: mk(value.net.params().len()),
        }
    }
}

fn gather<T: Real>(src: &Array2<T>, idx: &[usize]) -> Array2<T> {
    src.select(Axis(0), idx)
}

/// Loss gradients on one minibatch, before norm clipping.
#[derive(Debug, Clone, PartialEq)]
pub struct MinibatchGrad<T> {
    /// Policy mean-network parameters followed by the log-std entries.
    pub policy: Vec<T>,
    pub value: Vec<T>,
    pub policy_loss: T,
    pub value_loss: T,
    pub approx_kl: T,
    pub clip_fraction: f64,
}

/// Gradient of `policy_loss + value_coef * value_loss - entropy_coef * entropy`
/// on the rows `idx`. Returns `None` when a probability ratio is non-finite.
pub fn minibatch_grad<T: Real>(
    cfg: &PpoConfig,
    policy: &GaussianPolicy<T>,
    value: &ValueFunction<T>,
    buffer: &RolloutBuffer<T>,
    adv: &[T],
    idx: &[usize],
) -> Result<Option<MinibatchGrad<T>>> {
    let (c1, c2) = (T::lit(cfg.clip_low), T::lit(cfg.clip_high));
    let b = T::count(idx.len());
    let act_dim = policy.act_dim();
    let n_pi = policy.mean.params().len();
    let obs = gather(&buffer.observations, idx);
    let prv = gather(&buffer.privileged, idx);
    let act = gather(&buffer.actions, idx);
    let (mean, tape_pi) = policy.mean_train(ObservationBatch(obs.view()))?;
    let logp = policy.log_prob(&mean, &act);

    let inv_var: Vec<T> = policy.log_std.iter().map(|l| (-(*l + *l)).exp()).collect();
    let mut grad_mean = Array2::<T>::zeros(mean.dim());
    let mut grad_log_std = vec![T::zero(); act_dim];
    let (mut obj_sum, mut kl_sum, mut clipped) = (T::zero(), T::zero(), 0usize);
    for (k, &i) in idx.iter().enumerate() {
        let log_ratio = logp[k] - buffer.log_probs[i];
        let ratio = log_ratio.exp();
        if !ratio.is_finite() {
            return Ok(None);
        }
        let (obj, slope) = clipped_objective(ratio, adv[i], c1, c2);
        obj_sum = obj_sum + obj;
        kl_sum = kl_sum + (ratio - T::one()) - log_ratio;
        if ratio < c1 || ratio > c2 {
            clipped += 1;
        }
        // d(loss)/d(logp) for loss = -mean(obj)
        let coef = -slope * ratio / b;
        for j in 0..act_dim {
            let d = act[[k, j]] - mean[[k, j]];
            grad_mean[[k, j]] = coef * d * inv_var[j];
            grad_log_std[j] = grad_log_std[j] + coef * (d * d * inv_var[j] - T::one());
        }
    }
    let ent_coef = T::lit(cfg.entropy_coef);
    for g in grad_log_std.iter_mut() {
        *g = if cfg.learn_std { *g - ent_coef } else { T::zero() };
    }

    let (v, tape_v) = value.values_train(PrivilegedBatch(prv.view()))?;
    let mut v_loss = T::zero();
    let mut grad_v = Array2::<T>::zeros((idx.len(), 1));
    let vc = T::lit(cfg.value_coef);
    for (k, &i) in idx.iter().enumerate() {
        let e = v[k] - value.standardize_return(buffer.returns[i]);
        v_loss = v_loss + e * e;
        grad_v[[k, 0]] = vc * (e + e) / b;
    }

    let mut g_pi = vec![T::zero(); n_pi + act_dim];
    policy.mean.backward(&tape_pi, grad_mean.view(), &mut g_pi[..n_pi])?;
    g_pi[n_pi..].copy_from_slice(&grad_log_std);
    let mut g_v = vec![T::zero(); value.net.params().len()];
    value.net.backward(&tape_v, grad_v.view(), &mut g_v)?;
    Ok(Some(MinibatchGrad {
        policy: g_pi,
        value: g_v,
        policy_loss: -obj_sum / b,
        value_loss: v_loss / b,
        approx_kl: kl_sum / b,
        clip_fraction: clipped as f64 / idx.len() as f64,
    }))
}

/// Runs `cfg.epochs` passes of shuffled minibatches. Minibatches whose ratios
/// or gradients are non-finite are skipped and counted.
pub fn ppo_update<T: Real, R: Rng + ?Sized>(
    cfg: &PpoConfig,
    policy: &mut GaussianPolicy<T>,
    value: &mut ValueFunction<T>,
    opt: &mut Optimizers<T>,
    buffer: &RolloutBuffer<T>,
    rng: &mut R,
) -> Result<UpdateStats> {
    if !buffer.is_full() {
        return Err(Error::contract("update needs a full rollout buffer"));
    }
    let n = buffer.num_envs() * buffer.horizon();
    let mut adv = buffer.advantages.to_vec();
    if cfg.normalize_advantages {
        normalize_advantages(&mut adv);
    }
    let mb_size = n / cfg.minibatches;
    let n_pi = policy.mean.params().len();
    let mut stats = UpdateStats::default();
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for mb in order.chunks(mb_size).take(cfg.minibatches) {
            let Some(mut g) = minibatch_grad(cfg, policy, value, buffer, &adv, mb)? else {
                stats.steps_skipped += 1;
                continue;
            };
            let norm = g.policy.iter().chain(&g.value).fold(T::zero(), |s, x| s + *x * *x).sqrt();
            if !norm.is_finite() {
                stats.steps_skipped += 1;
                continue;
            }
            let max_norm = T::lit(cfg.max_grad_norm);
            if norm > max_norm {
                let s = max_norm / (norm + T::lit(1e-6));
                g.policy.iter_mut().chain(g.value.iter_mut()).for_each(|x| *x = *x * s);
            }

            let mut p: Vec<T> = policy.mean.params().to_vec();
            p.extend_from_slice(&policy.log_std);
            opt.policy.step(&mut p, &g.policy);
            policy.mean.params_mut().copy_from_slice(&p[..n_pi]);
            policy.log_std.copy_from_slice(&p[n_pi..]);
            opt.value.step(value.net.params_mut(), &g.value);

            stats.policy_loss += g.policy_loss.as_f64();
            stats.value_loss += g.value_loss.as_f64();
            stats.entropy += policy.entropy().as_f64();
            stats.approx_kl += g.approx_kl.as_f64();
            stats.clip_fraction += g.clip_fraction;
            stats.grad_norm += norm.as_f64();
            stats.steps_taken += 1;
        }
    }
    if stats.steps_taken > 0 {
        let k = stats.steps_taken as f64;
        stats.policy_loss /= k;
        stats.value_loss /= k;
        stats.entropy /= k;
        stats.approx_kl /= k;
        stats.clip_fraction /= k;
        stats.grad_norm /= k;
    }
    Ok(stats)
}

/// Total PPO loss on a minibatch, for gradient checks. The value term is
/// measured in standardized return units, like the update.
pub fn total_loss<T: Real>(
    cfg: &PpoConfig,
    policy: &GaussianPolicy<T>,
    value: &ValueFunction<T>,
    buffer: &RolloutBuffer<T>,
    adv: &[T],
    idx: &[usize],
) -> Result<T> {
    let obs = gather(&buffer.observations, idx);
    let prv = gather(&buffer.privileged, idx);
    let act = gather(&buffer.actions, idx);
    let mean = policy.act_mean(ObservationBatch(obs.view()))?;
    let logp = policy.log_prob(&mean, &act);
    let new: Vec<T> = logp.to_vec();
    let old: Vec<T> = idx.iter().map(|&i| buffer.log_probs[i]).collect();
    let a: Vec<T> = idx.iter().map(|&i| adv[i]).collect();
    let pl = super::gae::policy_loss(&new, &old, &a, T::lit(cfg.clip_low), T::lit(cfg.clip_high))?;
    let (v, _): (Array1<T>, _) = value.values_train(PrivilegedBatch(prv.view()))?;
    let r: Vec<T> = idx.iter().map(|&i| value.standardize_return(buffer.returns[i])).collect();
    let vl = super::gae::value_loss(&r, &v.to_vec())?;
    Ok(pl + T::lit(cfg.value_coef) * vl - T::lit(cfg.entropy_coef) * policy.entropy())
}
