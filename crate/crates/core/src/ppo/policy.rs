//! Gaussian actor over stacked observations and a critic over privileged state.
//!
//! The two networks take distinct batch types so the actor cannot be fed
//! privileged data and the critic cannot be fed the noisy observation stack.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mlp::{Activation, Mlp, Tape};
use super::normalizer::RunningNorm;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rows of stacked policy observations.
#[derive(Debug, Clone, Copy)]
pub struct ObservationBatch<'a, T>(pub ArrayView2<'a, T>);

/// Rows of stacked privileged states.
#[derive(Debug, Clone, Copy)]
pub struct PrivilegedBatch<'a, T>(pub ArrayView2<'a, T>);

/// Standardized inputs are clipped to this many standard deviations.
pub const OBS_CLIP: f64 = 5.0;

fn half_log_two_pi<T: Real>() -> T {
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy<T> {
    /// Input standardization, applied before the mean network.
    pub obs_norm: RunningNorm,
    pub mean: Mlp<T>,
    /// State-independent log standard deviation per action dimension.
    pub log_std: Vec<T>,
}

impl<T: Real> GaussianPolicy<T> {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, hidden: &[usize], act_dim: usize, init_std: f64, rng: &mut R) -> Result<Self> {
        if !(init_std > 0.0) {
            return Err(Error::Config("initial action std must be > 0".into()));
        }
        let mut dims = vec![obs_dim];
        dims.extend_from_slice(hidden);
        dims.push(act_dim);
        Ok(Self {
            obs_norm: RunningNorm::new(obs_dim, OBS_CLIP),
            mean: Mlp::new(&dims, Activation::Elu, 0.01, rng)?,
            log_std: vec![T::lit(init_std.ln()); act_dim],
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.mean.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.mean.output_dim()
    }

    pub fn num_params(&self) -> usize {
        self.mean.params().len() + self.log_std.len()
    }

    /// Deterministic (mode) actions.
    pub fn act_mean(&self, obs: ObservationBatch<'_, T>) -> Result<Array2<T>> {
        self.mean.forward(self.obs_norm.normalize(obs.0).view())
    }

    pub fn mean_train(&self, obs: ObservationBatch<'_, T>) -> Result<(Array2<T>, Tape<T>)> {
        self.mean.forward_train(self.obs_norm.normalize(obs.0).view())
    }

    /// Samples actions around `mean`, returning them with their log-probabilities.
    pub fn sample<R: Rng + ?Sized>(&self, mean: &Array2<T>, rng: &mut R) -> (Array2<T>, Array1<T>) {
        let std: Vec<T> = self.log_std.iter().map(|l| l.exp()).collect();
        let mut actions = mean.clone();
        for mut row in actions.rows_mut() {
            for (a, s) in row.iter_mut().zip(&std) {
                let z: f64 = StandardNormal.sample(rng);
                *a = *a + *s * T::lit(z);
            }
        }
        let logp = self.log_prob(mean, &actions);
        (actions, logp)
    }

    /// Row-wise log density of `actions` under N(mean, diag(exp(log_std))²).
    pub fn log_prob(&self, mean: &Array2<T>, actions: &Array2<T>) -> Array1<T> {
        let c = half_log_two_pi::<T>();
        let half = T::lit(0.5);
        Array1::from_iter(mean.rows().into_iter().zip(actions.rows()).map(|(m, a)| {
            m.iter()
                .zip(a.iter())
                .zip(&self.log_std)
                .fold(T::zero(), |s, ((m, a), l)| {
                    let z = (*a - *m) / l.exp();
                    s - half * z * z - *l - c
                })
        }))
    }

    /// Differential entropy of the action distribution (same for every state).
    pub fn entropy(&self) -> T {
        let k = T::lit(0.5) + half_log_two_pi::<T>();
        self.log_std.iter().fold(T::zero(), |s, l| s + *l + k)
    }

    pub fn is_finite(&self) -> bool {
        self.mean.params().iter().chain(&self.log_std).all(|p| p.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction<T> {
    /// Input standardization.
    pub state_norm: RunningNorm,
    /// Statistics of the value targets; the network predicts standardized returns.
    pub return_norm: RunningNorm,
    pub net: Mlp<T>,
}

impl<T: Real> ValueFunction<T> {
    pub fn new<R: Rng + ?Sized>(priv_dim: usize, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let mut dims = vec![priv_dim];
        dims.extend_from_slice(hidden);
        dims.push(1);
        Ok(Self {
            state_norm: RunningNorm::new(priv_dim, OBS_CLIP),
            return_norm: RunningNorm::new(1, f64::INFINITY),
            net: Mlp::new(&dims, Activation::Elu, 1.0, rng)?,
        })
    }

    pub fn priv_dim(&self) -> usize {
        self.net.input_dim()
    }

    /// Value estimates in return units.
    pub fn values(&self, state: PrivilegedBatch<'_, T>) -> Result<Array1<T>> {
        let out = self.net.forward(self.state_norm.normalize(state.0).view())?;
        Ok(out.column(0).mapv(|v| T::lit(self.return_norm.denormalize_value(0, v.as_f64()))))
    }

    /// Standardized predictions with the tape for backpropagation.
    pub fn values_train(&self, state: PrivilegedBatch<'_, T>) -> Result<(Array1<T>, Tape<T>)> {
        let (out, tape) = self.net.forward_train(self.state_norm.normalize(state.0).view())?;
        Ok((out.column(0).to_owned(), tape))
    }

    /// A return expressed in the network's standardized target units.
    pub fn standardize_return(&self, r: T) -> T {
        T::lit(self.return_norm.normalize_value(0, r.as_f64()))
    }

    pub fn is_finite(&self) -> bool {
        self.net.params().iter().all(|p| p.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_prob_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pi = GaussianPolicy::<f64>::new(3, &[4], 2, 0.8, &mut rng).unwrap();
        pi.log_std = vec![0.1, -0.4];
        let mean = Array2::from_shape_vec((1, 2), vec![0.5, -1.0]).unwrap();
        let act = Array2::from_shape_vec((1, 2), vec![0.2, -0.3]).unwrap();
        let lp = pi.log_prob(&mean, &act)[0];
        let mut expected = 0.0;
        for ((m, a), l) in [0.5, -1.0].iter().zip([0.2, -0.3]).zip([0.1f64, -0.4]) {
            let s = l.exp();
            expected += -((a - m) * (a - m)) / (2.0 * s * s) - (s * (2.0 * std::f64::consts::PI).sqrt()).ln();
        }
        assert!((lp - expected).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_unit_gaussian() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pi = GaussianPolicy::<f64>::new(3, &[4], 2, 1.0, &mut rng).unwrap();
        let h = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((pi.entropy() - 2.0 * h).abs() < 1e-12);
    }

    #[test]
    fn sample_spread_follows_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pi = GaussianPolicy::<f64>::new(2, &[3], 1, 0.8, &mut rng).unwrap();
        let mean = Array2::zeros((20_000, 1));
        let (a, _) = pi.sample(&mean, &mut rng);
        let var = a.iter().map(|x| x * x).sum::<f64>() / 20_000.0;
        assert!((var.sqrt() - 0.8).abs() < 0.02);
    }
}
