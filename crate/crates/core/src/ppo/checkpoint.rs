//! Binary checkpoint of the actor and critic.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `BPLC` |
//! | 4 | u32 format version (1) |
//! | 8 | u64 training iteration |
//! | 4 | u32 number of policy layer dims `P` |
//! | 4·P | u32 policy dims, input first |
//! | 4 | u32 number of value layer dims `V` |
//! | 4·V | u32 value dims, input first |
//! | 4·n | f32 policy parameters: per layer the `[in, out]` weights row-major, then the bias |
//! | 4·a | f32 log standard deviations, one per action |
//! | 4·m | f32 value parameters, same per-layer order |
//! | | observation normalizer, then privileged-state normalizer, then return normalizer |
//!
//! Each normalizer is stored as f64 sample count, f64 clip, then `d` f64
//! means and `d` f64 variances, where `d` is the input width of its network
//! (1 for the return normalizer).
//!
//! Both networks use ELU hidden activations and a linear output layer.

use std::path::Path;

use super::mlp::{Activation, Mlp};
use super::normalizer::RunningNorm;
use super::policy::{GaussianPolicy, ValueFunction};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"BPLC";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub iteration: u64,
    pub policy: GaussianPolicy<f32>,
    pub value: ValueFunction<f32>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn dims(&mut self) -> Result<Vec<usize>> {
        let n = self.u32()? as usize;
        if !(2..=64).contains(&n) {
            return Err(Error::Checkpoint(format!("implausible layer count {n}")));
        }
        (0..n).map(|_| self.u32().map(|d| d as usize)).collect()
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn norm(&mut self, dim: usize) -> Result<RunningNorm> {
        let head = self.f64s(2)?;
        let mean = self.f64s(dim)?;
        let var = self.f64s(dim)?;
        Ok(RunningNorm::from_parts(head[0], mean, var, head[1]))
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f32>> {
        let raw = self.take(n * 4)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}

fn convert<T: Real, U: Real>(v: &[T]) -> Vec<U> {
    v.iter().map(|x| U::lit(x.as_f64())).collect()
}

impl Checkpoint {
    pub fn new<T: Real>(iteration: u64, policy: &GaussianPolicy<T>, value: &ValueFunction<T>) -> Self {
        Self {
            iteration,
            policy: GaussianPolicy {
                obs_norm: policy.obs_norm.clone(),
                mean: Mlp::from_params(policy.mean.dims(), Activation::Elu, convert(policy.mean.params())).expect("same dims"),
                log_std: convert(&policy.log_std),
            },
            value: ValueFunction {
                state_norm: value.state_norm.clone(),
                return_norm: value.return_norm.clone(),
                net: Mlp::from_params(value.net.dims(), Activation::Elu, convert(value.net.params())).expect("same dims"),
            },
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.iteration.to_le_bytes());
        for dims in [self.policy.mean.dims(), self.value.net.dims()] {
            out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
            for d in dims {
                out.extend_from_slice(&(*d as u32).to_le_bytes());
            }
        }
        let params = self
            .policy
            .mean
            .params()
            .iter()
            .chain(&self.policy.log_std)
            .chain(self.value.net.params());
        for p in params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        for n in [&self.policy.obs_norm, &self.value.state_norm, &self.value.return_norm] {
            let vals = [n.count(), n.clip()].into_iter().chain(n.mean().iter().copied()).chain(n.var().iter().copied());
            for v in vals {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Checkpoint("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let iteration = r.u64()?;
        let pd = r.dims()?;
        let vd = r.dims()?;
        if *vd.last().expect("checked") != 1 {
            return Err(Error::DimensionMismatch {
                network: "value",
                expected: vec![1],
                found: vec![*vd.last().expect("checked")],
            });
        }
        let n_pi = pd.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let n_v = vd.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let act = *pd.last().expect("checked");
        let mean = Mlp::from_params(&pd, Activation::Elu, r.floats(n_pi)?)?;
        let log_std = r.floats(act)?;
        let net = Mlp::from_params(&vd, Activation::Elu, r.floats(n_v)?)?;
        let obs_norm = r.norm(pd[0])?;
        let state_norm = r.norm(vd[0])?;
        let return_norm = r.norm(1)?;
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Self {
            iteration,
            policy: GaussianPolicy { obs_norm, mean, log_std },
            value: ValueFunction { state_norm, return_norm, net },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint(m) => Error::Checkpoint(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks the input and output widths against what the caller will feed.
    pub fn expect_dims(&self, obs_dim: usize, act_dim: usize, priv_dim: usize) -> Result<()> {
        let pd = self.policy.mean.dims();
        let found = vec![pd[0], *pd.last().expect("non-empty")];
        if found != [obs_dim, act_dim] {
            return Err(Error::DimensionMismatch {
                network: "policy",
                expected: vec![obs_dim, act_dim],
                found,
            });
        }
        let vd = self.value.net.dims()[0];
        if vd != priv_dim {
            return Err(Error::DimensionMismatch {
                network: "value",
                expected: vec![priv_dim, 1],
                found: vec![vd, 1],
            });
        }
        Ok(())
    }

    /// The policy in another scalar type.
    pub fn policy_as<T: Real>(&self) -> GaussianPolicy<T> {
        GaussianPolicy {
            obs_norm: self.policy.obs_norm.clone(),
            mean: Mlp::from_params(self.policy.mean.dims(), Activation::Elu, convert(self.policy.mean.params())).expect("same dims"),
            log_std: convert(&self.policy.log_std),
        }
    }
}
