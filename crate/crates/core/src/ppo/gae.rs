//! Advantage estimation and the PPO loss terms.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Backward GAE recursion over one environment's trajectory.
///
/// `values` has one more entry than `rewards`: the bootstrap value of the
/// state after the last step. `dones[t]` cuts both the bootstrap and the
/// recursion at step `t`. Returns `(advantages, returns)`.
pub fn gae_advantages<T: Real>(rewards: &[T], values: &[T], dones: &[bool], gamma: T, lambda: T) -> Result<(Vec<T>, Vec<T>)> {
    let n = rewards.len();
    if values.len() != n + 1 || dones.len() != n {
        return Err(Error::contract(format!(
            "gae expects values = rewards + 1 and dones = rewards; got {} rewards, {} values, {} dones",
            n,
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![T::zero(); n];
    let mut next = T::zero();
    for t in (0..n).rev() {
        let live = if dones[t] { T::zero() } else { T::one() };
        let delta = rewards[t] + gamma * values[t + 1] * live - values[t];
        next = delta + gamma * lambda * live * next;
        adv[t] = next;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| *a + *v).collect();
    Ok((adv, returns))
}

/// Shifts and scales to zero mean and unit (population) standard deviation.
pub fn normalize_advantages<T: Real>(adv: &mut [T]) {
    if adv.is_empty() {
        return;
    }
    let n = T::count(adv.len());
    let mean = adv.iter().fold(T::zero(), |s, a| s + *a) / n;
    let var = adv.iter().fold(T::zero(), |s, a| s + (*a - mean) * (*a - mean)) / n;
    let std = var.sqrt() + T::lit(1e-8);
    for a in adv.iter_mut() {
        *a = (*a - mean) / std;
    }
}

/// Per-sample clipped surrogate `min(r A, clip(r, c1, c2) A)` and its derivative in `r`.
pub fn clipped_objective<T: Real>(ratio: T, adv: T, c1: T, c2: T) -> (T, T) {
    let unclipped = ratio * adv;
    let clipped = ratio.max(c1).min(c2) * adv;
    if unclipped <= clipped {
        (unclipped, adv)
    } else {
        (clipped, T::zero())
    }
}

/// Negative mean clipped surrogate, so descending it ascends the objective.
pub fn policy_loss<T: Real>(new_log_prob: &[T], old_log_prob: &[T], adv: &[T], c1: T, c2: T) -> Result<T> {
    let n = adv.len();
    if new_log_prob.len() != n || old_log_prob.len() != n || n == 0 {
        return Err(Error::contract("policy loss inputs must be non-empty and aligned"));
    }
    let mut sum = T::zero();
    for i in 0..n {
        let ratio = (new_log_prob[i] - old_log_prob[i]).exp();
        if !ratio.is_finite() {
            return Err(Error::NonFinite(format!("probability ratio at sample {i}")));
        }
        sum = sum + clipped_objective(ratio, adv[i], c1, c2).0;
    }
    Ok(-sum / T::count(n))
}

/// Mean squared error between returns and value predictions.
pub fn value_loss<T: Real>(returns: &[T], predictions: &[T]) -> Result<T> {
    if returns.len() != predictions.len() || returns.is_empty() {
        return Err(Error::contract("value loss inputs must be non-empty and aligned"));
    }
    let sum = returns
        .iter()
        .zip(predictions)
        .fold(T::zero(), |s, (r, v)| s + (*r - *v) * (*r - *v));
    Ok(sum / T::count(returns.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Sum of discounted TD residuals, written without the recursion.
    fn brute_force(r: &[f64], v: &[f64], d: &[bool], g: f64, l: f64) -> Vec<f64> {
        let n = r.len();
        (0..n)
            .map(|t| {
                let mut total = 0.0;
                let mut w = 1.0;
                for k in t..n {
                    let live = if d[k] { 0.0 } else { 1.0 };
                    total += w * (r[k] + g * v[k + 1] * live - v[k]);
                    if d[k] {
                        break;
                    }
                    w *= g * l;
                }
                total
            })
            .collect()
    }

    #[test]
    fn zero_rewards_and_values() {
        let (a, r) = gae_advantages(&[0.0; 4], &[0.0; 5], &[false; 4], 0.994, 0.95).unwrap();
        assert!(a.iter().chain(&r).all(|x| *x == 0.0));
    }

    #[test]
    fn one_step_td() {
        let (a, r) = gae_advantages(&[1.0f64], &[1.0, 2.0], &[false], 0.994, 0.95).unwrap();
        assert!((a[0] - 1.988).abs() < 1e-12);
        assert!((r[0] - 2.988).abs() < 1e-12);
    }

    #[test]
    fn five_steps_match_oracle() {
        let r = [0.3, -1.0, 2.0, 0.5, 1.5];
        let v = [0.1, 0.7, -0.2, 1.1, 0.4, 0.9];
        for d in [[false; 5], [false, true, false, false, true], [true, false, false, true, false]] {
            let (a, _) = gae_advantages(&r, &v, &d, 0.994, 0.95).unwrap();
            for (x, y) in a.iter().zip(brute_force(&r, &v, &d, 0.994, 0.95)) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(gae_advantages(&[1.0], &[1.0], &[false], 0.9, 0.9).is_err());
    }

    #[test]
    fn clip_arithmetic() {
        assert_eq!(clipped_objective(1.5, 1.0, 0.8, 1.2), (1.2, 0.0));
        assert_eq!(clipped_objective(0.5, -1.0, 0.8, 1.2).0, -0.8);
        let loss = policy_loss(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 2.0], 0.8, 1.2).unwrap();
        assert_eq!(loss, -1.5);
        assert!(policy_loss(&[1000.0], &[0.0], &[1.0], 0.8, 1.2).is_err());
    }

    #[test]
    fn clipped_branch_has_zero_slope() {
        let f = |r: f64, a: f64| clipped_objective(r, a, 0.8, 1.2).0;
        let h = 1e-6;
        for (r, a) in [(1.5, 1.0), (0.5, -1.0), (1.3, 2.0), (0.6, -0.5)] {
            let fd = (f(r + h, a) - f(r - h, a)) / (2.0 * h);
            assert_eq!(fd, 0.0);
            assert_eq!(clipped_objective(r, a, 0.8, 1.2).1, 0.0);
        }
        // inside the bounds or on the pessimistic side the slope is A
        for (r, a) in [(1.0, 1.0), (0.5, 1.0), (1.5, -1.0)] {
            let fd = (f(r + h, a) - f(r - h, a)) / (2.0 * h);
            assert!((fd - a).abs() < 1e-6);
        }
    }

    #[test]
    fn value_loss_examples() {
        assert_eq!(value_loss(&[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(value_loss(&[1.0, 3.0], &[0.0, 3.0]).unwrap(), 0.5);
        assert_eq!(value_loss(&[3.0, 1.0], &[3.0, 0.0]).unwrap(), 0.5);
    }

    proptest! {
        #[test]
        fn lambda_zero_is_one_step_td(
            seq in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, any::<bool>()), 1..20),
            boot in -5.0f64..5.0,
        ) {
            let r: Vec<f64> = seq.iter().map(|s| s.0).collect();
            let mut v: Vec<f64> = seq.iter().map(|s| s.1).collect();
            v.push(boot);
            let d: Vec<bool> = seq.iter().map(|s| s.2).collect();
            let g = 0.994;
            let (a, _) = gae_advantages(&r, &v, &d, g, 0.0).unwrap();
            for t in 0..r.len() {
                let live = if d[t] { 0.0 } else { 1.0 };
                prop_assert!((a[t] - (r[t] + g * v[t + 1] * live - v[t])).abs() < 1e-10);
            }
        }

        #[test]
        fn lambda_one_is_monte_carlo_minus_baseline(
            seq in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, any::<bool>()), 1..20),
            boot in -5.0f64..5.0,
        ) {
            let r: Vec<f64> = seq.iter().map(|s| s.0).collect();
            let mut v: Vec<f64> = seq.iter().map(|s| s.1).collect();
            v.push(boot);
            let d: Vec<bool> = seq.iter().map(|s| s.2).collect();
            let g = 0.994;
            let (a, _) = gae_advantages(&r, &v, &d, g, 1.0).unwrap();
            for t in 0..r.len() {
                let mut ret = 0.0;
                let mut w = 1.0;
                let mut k = t;
                loop {
                    ret += w * r[k];
                    w *= g;
                    if d[k] {
                        break;
                    }
                    k += 1;
                    if k == r.len() {
                        ret += w * boot;
                        break;
                    }
                }
                prop_assert!((a[t] - (ret - v[t])).abs() < 1e-9);
            }
        }

        #[test]
        fn normalization_moments(mut v in prop::collection::vec(-100.0f64..100.0, 2..200)) {
            let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
            prop_assume!(spread > 1.0);
            normalize_advantages(&mut v);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-8);
            prop_assert!((std - 1.0).abs() < 1e-6);
        }

        #[test]
        fn value_loss_is_order_invariant(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..30)) {
            let r: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let v: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let a = value_loss(&r, &v).unwrap();
            let rr: Vec<f64> = r.iter().rev().cloned().collect();
            let vr: Vec<f64> = v.iter().rev().cloned().collect();
            prop_assert!((a - value_loss(&rr, &vr).unwrap()).abs() < 1e-9);
        }
    }
}
