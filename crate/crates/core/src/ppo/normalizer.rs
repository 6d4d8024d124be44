use ndarray::{Array2, ArrayView2};

use crate::scalar::Real;

/// Running per-dimension mean and variance used to standardize network inputs
/// or value targets. With no samples it is the identity (mean 0, variance 1).
#[derive(Debug, Clone, PartialEq)]
pub struct RunningNorm {
    count: f64,
    mean: Vec<f64>,
    var: Vec<f64>,
    /// Standardized values are clipped to `±clip`.
    clip: f64,
}

const EPS: f64 = 1e-8;

impl RunningNorm {
    pub fn new(dim: usize, clip: f64) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            var: vec![1.0; dim],
            clip,
        }
    }

    pub fn from_parts(count: f64, mean: Vec<f64>, var: Vec<f64>, clip: f64) -> Self {
        assert_eq!(mean.len(), var.len(), "mean and variance lengths differ");
        Self { count, mean, var, clip }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    /// Merges the rows of `batch` into the statistics (parallel-variance update).
    pub fn update<T: Real>(&mut self, batch: ArrayView2<'_, T>) {
        let n = batch.nrows() as f64;
        if n == 0.0 {
            return;
        }
        assert_eq!(batch.ncols(), self.dim(), "batch width differs from normalizer width");
        let total = self.count + n;
        for (j, col) in batch.columns().into_iter().enumerate() {
            let bm = col.iter().map(|v| v.as_f64()).sum::<f64>() / n;
            let bv = col.iter().map(|v| (v.as_f64() - bm).powi(2)).sum::<f64>() / n;
            if self.count == 0.0 {
                self.mean[j] = bm;
                self.var[j] = bv;
            } else {
                let d = bm - self.mean[j];
                self.mean[j] += d * n / total;
                self.var[j] = (self.var[j] * self.count + bv * n + d * d * self.count * n / total) / total;
            }
        }
        self.count = total;
    }

    pub fn normalize_value(&self, j: usize, v: f64) -> f64 {
        if self.count == 0.0 {
            return v;
        }
        ((v - self.mean[j]) / (self.var[j] + EPS).sqrt()).clamp(-self.clip, self.clip)
    }

    pub fn denormalize_value(&self, j: usize, v: f64) -> f64 {
        if self.count == 0.0 {
            return v;
        }
        v * (self.var[j] + EPS).sqrt() + self.mean[j]
    }

    pub fn normalize<T: Real>(&self, x: ArrayView2<'_, T>) -> Array2<T> {
        if self.count == 0.0 {
            return x.to_owned();
        }
        Array2::from_shape_fn(x.dim(), |(i, j)| T::lit(self.normalize_value(j, x[[i, j]].as_f64())))
    }
}
