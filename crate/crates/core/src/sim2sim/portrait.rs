use std::ops::Range;

use super::record::TrajectoryRecord;
use crate::error::{Error, Result};

/// `(θ, θ̇)` pairs of one joint over a sample window.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePortrait {
    pub joint: String,
    pub points: Vec<(f64, f64)>,
}

/// Extracts the portrait of `joint` over the sample indices in `window`.
pub fn phase_portrait(record: &TrajectoryRecord, joint: &str, window: Range<usize>) -> Result<PhasePortrait> {
    let j = record.joint_index(joint)?;
    if window.start > window.end || window.end > record.len() {
        return Err(Error::contract(format!(
            "window {window:?} outside a record of {} samples",
            record.len()
        )));
    }
    Ok(PhasePortrait {
        joint: joint.to_string(),
        points: record.samples[window].iter().map(|s| (s.theta[j], s.theta_dot[j])).collect(),
    })
}

/// Axis-aligned ellipse `((x - cx) / a)² + ((y - cy) / b)² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: (f64, f64),
    pub semi_axes: (f64, f64),
}

/// Least-squares axis-aligned ellipse through the portrait points.
///
/// Fits `p x² + q y² + r x + s y = 1` in the coordinates relative to the
/// centroid, then completes the squares.
pub fn fit_ellipse(portrait: &PhasePortrait) -> Result<Ellipse> {
    let pts = &portrait.points;
    if pts.len() < 4 {
        return Err(Error::contract("an ellipse fit needs at least four points"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    // scale both axes to unit spread so the normal equations stay conditioned
    let sx = (pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / n).sqrt();
    let sy = (pts.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / n).sqrt();
    if !(sx > 0.0 && sy > 0.0) {
        return Err(Error::contract("portrait is degenerate along one axis"));
    }
    let mut ata = [[0.0; 4]; 4];
    let mut atb = [0.0; 4];
    for &(x, y) in pts {
        let (u, v) = ((x - mx) / sx, (y - my) / sy);
        let row = [u * u, v * v, u, v];
        for i in 0..4 {
            for k in 0..4 {
                ata[i][k] += row[i] * row[k];
            }
            atb[i] += row[i];
        }
    }
    let [p, q, r, s] = solve4(ata, atb).ok_or_else(|| Error::contract("degenerate ellipse fit"))?;
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::contract("points do not lie on an ellipse"));
    }
    let (cu, cv) = (-r / (2.0 * p), -s / (2.0 * q));
    let k = 1.0 + p * cu * cu + q * cv * cv;
    Ok(Ellipse {
        center: (mx + cu * sx, my + cv * sy),
        semi_axes: ((k / p).sqrt() * sx, (k / q).sqrt() * sy),
    })
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim2sim::record::Sample;

    fn record_from(f: impl Fn(f64) -> (f64, f64), n: usize) -> TrajectoryRecord {
        let mut rec = TrajectoryRecord::for_robot();
        for k in 0..n {
            let t = k as f64 * 0.01;
            let (th, thd) = f(t);
            rec.samples.push(Sample {
                t,
                theta: vec![th; 6],
                theta_dot: vec![thd; 6],
                base_pose: [0.0; 6],
                base_vel: [0.0; 3],
                contact_force: [0.0; 2],
            });
        }
        rec
    }

    #[test]
    fn pure_sine_gives_the_analytic_ellipse() {
        let (a, w) = (0.3, 2.0 * std::f64::consts::PI * 1.5);
        let rec = record_from(|t| (a * (w * t).sin(), a * w * (w * t).cos()), 500);
        let p = phase_portrait(&rec, "left_knee", 0..500).unwrap();
        assert_eq!(p.points.len(), 500);
        let e = fit_ellipse(&p).unwrap();
        assert!((e.semi_axes.0 / a - 1.0).abs() < 0.01);
        assert!((e.semi_axes.1 / (a * w) - 1.0).abs() < 0.01);
        assert!(e.center.0.abs() < 1e-6 && e.center.1.abs() < 1e-6);
    }

    #[test]
    fn constant_pose_collapses_to_a_point() {
        let rec = record_from(|_| (0.2, 0.0), 50);
        let p = phase_portrait(&rec, "left_ankle_pitch", 10..40).unwrap();
        assert_eq!(p.points.len(), 30);
        assert!(p.points.iter().all(|&pt| pt == (0.2, 0.0)));
        assert!(fit_ellipse(&p).is_err());
    }

    #[test]
    fn unknown_joint_lists_valid_names() {
        let rec = record_from(|_| (0.0, 0.0), 5);
        let msg = phase_portrait(&rec, "left_elbow", 0..5).unwrap_err().to_string();
        assert!(msg.contains("left_elbow") && msg.contains("left_knee") && msg.contains("right_ankle_pitch"));
        assert!(phase_portrait(&rec, "left_knee", 0..6).is_err());
    }
}
