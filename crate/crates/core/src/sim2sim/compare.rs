use std::collections::HashSet;

use super::record::{Sample, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::model::POLICY_DT;

/// Raster resolution per axis for the portrait discrepancy.
pub const PORTRAIT_GRID: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub joint_names: Vec<String>,
    /// rad, per joint
    pub rms_position: Vec<f64>,
    /// Fraction of raster cells covered by exactly one of the two portraits, per joint.
    pub portrait_discrepancy: Vec<f64>,
    /// m/s, over the planar base velocity `(vx, vz)`
    pub base_velocity_rms: f64,
    /// s
    pub window: f64,
    pub samples: usize,
}

impl DivergenceReport {
    pub fn is_zero(&self) -> bool {
        self.base_velocity_rms == 0.0
            && self.rms_position.iter().chain(&self.portrait_discrepancy).all(|v| *v == 0.0)
    }
}

fn tick(s: &Sample) -> i64 {
    (s.t / POLICY_DT).round() as i64
}

/// Aligns both records on their common 100 Hz window.
fn common_window<'a>(a: &'a TrajectoryRecord, b: &'a TrajectoryRecord) -> Result<(&'a [Sample], &'a [Sample])> {
    let (Some(a0), Some(b0)) = (a.samples.first(), b.samples.first()) else {
        return Err(Error::EmptyOverlap);
    };
    let start = tick(a0).max(tick(b0));
    let end = (tick(a0) + a.len() as i64).min(tick(b0) + b.len() as i64);
    if end <= start {
        return Err(Error::EmptyOverlap);
    }
    let sa = (start - tick(a0)) as usize;
    let sb = (start - tick(b0)) as usize;
    let n = (end - start) as usize;
    Ok((&a.samples[sa..sa + n], &b.samples[sb..sb + n]))
}

fn rasterize(points: &[(f64, f64)], lo: (f64, f64), span: (f64, f64)) -> HashSet<(usize, usize)> {
    let g = PORTRAIT_GRID as f64;
    let cell = |p: (f64, f64)| {
        let u = ((p.0 - lo.0) / span.0 * g).floor().clamp(0.0, g - 1.0);
        let v = ((p.1 - lo.1) / span.1 * g).floor().clamp(0.0, g - 1.0);
        (u, v)
    };
    let mut cells = HashSet::new();
    for (i, &p) in points.iter().enumerate() {
        let c1 = cell(p);
        let c0 = if i == 0 { c1 } else { cell(points[i - 1]) };
        let steps = (c1.0 - c0.0).abs().max((c1.1 - c0.1).abs()) as usize;
        for k in 0..=steps {
            let f = if steps == 0 { 0.0 } else { k as f64 / steps as f64 };
            let u = (c0.0 + f * (c1.0 - c0.0)).round() as usize;
            let v = (c0.1 + f * (c1.1 - c0.1)).round() as usize;
            cells.insert((u, v));
        }
    }
    cells
}

/// Rasterized symmetric-difference discrepancy of two portraits in `[0, 1]`.
pub fn portrait_discrepancy(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a == b {
        return 0.0;
    }
    let all = a.iter().chain(b);
    let (mut lo, mut hi) = ((f64::MAX, f64::MAX), (f64::MIN, f64::MIN));
    for p in all {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    }
    let span = ((hi.0 - lo.0).max(1e-9), (hi.1 - lo.1).max(1e-9));
    let ra = rasterize(a, lo, span);
    let rb = rasterize(b, lo, span);
    let union = ra.union(&rb).count();
    if union == 0 {
        return 0.0;
    }
    ra.symmetric_difference(&rb).count() as f64 / union as f64
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), d| (s + d * d, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Per-joint and base-velocity divergence over the common window of two records.
pub fn compare_trajectories(a: &TrajectoryRecord, b: &TrajectoryRecord) -> Result<DivergenceReport> {
    if a.joint_names != b.joint_names {
        return Err(Error::contract("records cover different joints"));
    }
    let (wa, wb) = common_window(a, b)?;
    let nj = a.joint_names.len();
    let mut rms_position = Vec::with_capacity(nj);
    let mut portrait = Vec::with_capacity(nj);
    for j in 0..nj {
        rms_position.push(rms(wa.iter().zip(wb).map(|(x, y)| x.theta[j] - y.theta[j])));
        let pa: Vec<(f64, f64)> = wa.iter().map(|s| (s.theta[j], s.theta_dot[j])).collect();
        let pb: Vec<(f64, f64)> = wb.iter().map(|s| (s.theta[j], s.theta_dot[j])).collect();
        portrait.push(portrait_discrepancy(&pa, &pb));
    }
    let vel = {
        let (sum, n) = wa.iter().zip(wb).fold((0.0, 0usize), |(s, n), (x, y)| {
            let dx = x.base_vel[0] - y.base_vel[0];
            let dz = x.base_vel[1] - y.base_vel[1];
            (s + dx * dx + dz * dz, n + 1)
        });
        (sum / n as f64).sqrt()
    };
    Ok(DivergenceReport {
        joint_names: a.joint_names.clone(),
        rms_position,
        portrait_discrepancy: portrait,
        base_velocity_rms: vel,
        window: wa.len() as f64 * POLICY_DT,
        samples: wa.len(),
    })
}
