//! Self-contained SVG figures and their CSV data.
//!
//! Each joint figure is 960×400 px: the left panel overlays θ(t) of every
//! record, the right panel overlays the phase portraits (θ on x, θ̇ on y).
//! The divergence figure is a bar chart of per-joint RMS position difference,
//! one bar group per report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::compare::DivergenceReport;
use super::record::TrajectoryRecord;
use crate::error::{Error, Result};

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlotStatus {
    NothingToPlot,
    Written(Vec<PathBuf>),
}

impl PlotStatus {
    pub fn files(&self) -> &[PathBuf] {
        match self {
            PlotStatus::NothingToPlot => &[],
            PlotStatus::Written(f) => f,
        }
    }
}

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Panel {
    fn new(x0: f64, y0: f64, w: f64, h: f64, pts: impl Iterator<Item = (f64, f64)>) -> Self {
        let (mut lo, mut hi) = ((f64::MAX, f64::MAX), (f64::MIN, f64::MIN));
        for p in pts {
            lo = (lo.0.min(p.0), lo.1.min(p.1));
            hi = (hi.0.max(p.0), hi.1.max(p.1));
        }
        if lo.0 > hi.0 {
            lo = (0.0, 0.0);
            hi = (1.0, 1.0);
        }
        let pad = |a: f64, b: f64| if b - a < 1e-9 { (a - 0.5, b + 0.5) } else { (a, b) };
        let (x_lo, x_hi) = pad(lo.0, hi.0);
        let (y_lo, y_hi) = pad(lo.1, hi.1);
        Self { x0, y0, w, h, lo: (x_lo, y_lo), hi: (x_hi, y_hi) }
    }

    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        let u = self.x0 + (p.0 - self.lo.0) / (self.hi.0 - self.lo.0) * self.w;
        let v = self.y0 + self.h - (p.1 - self.lo.1) / (self.hi.1 - self.lo.1) * self.h;
        (u, v)
    }

    fn frame(&self, svg: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{title}</text>"#, self.x0 + self.w / 2.0, self.y0 - 8.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{xlabel}</text>"#, self.x0 + self.w / 2.0, self.y0 + self.h + 32.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
            self.x0 - 40.0,
            self.y0 + self.h / 2.0,
            self.x0 - 40.0,
            self.y0 + self.h / 2.0
        );
        for (v, anchor, (x, y)) in [
            (self.lo.0, "start", (self.x0, self.y0 + self.h + 16.0)),
            (self.hi.0, "end", (self.x0 + self.w, self.y0 + self.h + 16.0)),
        ] {
            let _ = writeln!(svg, r#"<text x="{x:.1}" y="{y:.1}" font-size="10" text-anchor="{anchor}">{v:.3}</text>"#);
        }
        for (v, y) in [(self.lo.1, self.y0 + self.h), (self.hi.1, self.y0 + 10.0)] {
            let _ = writeln!(svg, r#"<text x="{:.1}" y="{y:.1}" font-size="10" text-anchor="end">{v:.3}</text>"#, self.x0 - 4.0);
        }
    }

    fn polyline(&self, svg: &mut String, pts: &[(f64, f64)], color: &str) {
        let mut s = String::new();
        for p in pts {
            let (u, v) = self.map(*p);
            let _ = write!(s, "{u:.2},{v:.2} ");
        }
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, s.trim_end());
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn joint_svg(records: &[(String, TrajectoryRecord)], joint: &str, j: usize) -> String {
    let series: Vec<Vec<(f64, f64)>> = records
        .iter()
        .map(|(_, r)| r.samples.iter().map(|s| (s.t, s.theta[j])).collect())
        .collect();
    let portraits: Vec<Vec<(f64, f64)>> = records
        .iter()
        .map(|(_, r)| r.samples.iter().map(|s| (s.theta[j], s.theta_dot[j])).collect())
        .collect();
    let left = Panel::new(70.0, 40.0, 380.0, 300.0, series.iter().flatten().copied());
    let right = Panel::new(560.0, 40.0, 380.0, 300.0, portraits.iter().flatten().copied());
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="960" height="400" viewBox="0 0 960 400">"#);
    let _ = writeln!(svg, r#"<rect width="960" height="400" fill="white"/>"#);
    let name = escape(joint);
    left.frame(&mut svg, &format!("{name}: position"), "t [s]", "θ [rad]");
    right.frame(&mut svg, &format!("{name}: phase portrait"), "θ [rad]", "θ̇ [rad/s]");
    for (k, ((label, _), (s, p))) in records.iter().zip(series.iter().zip(&portraits)).enumerate() {
        let color = COLORS[k % COLORS.len()];
        left.polyline(&mut svg, s, color);
        right.polyline(&mut svg, p, color);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="390" font-size="12" fill="{color}">{}</text>"#,
            70.0 + 160.0 * k as f64,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn divergence_svg(reports: &[(String, DivergenceReport)]) -> String {
    let joints = &reports[0].1.joint_names;
    let max = reports
        .iter()
        .flat_map(|(_, r)| r.rms_position.iter().copied())
        .fold(0.0, f64::max)
        .max(1e-12);
    let (x0, y0, w, h) = (70.0, 40.0, 820.0, 280.0);
    let group = w / joints.len().max(1) as f64;
    let bar = group * 0.8 / reports.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="960" height="400" viewBox="0 0 960 400">"#);
    let _ = writeln!(svg, r#"<rect width="960" height="400" fill="white"/>"#);
    let _ = writeln!(svg, r##"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#444"/>"##);
    let _ = writeln!(svg, r#"<text x="480" y="28" font-size="14" text-anchor="middle">RMS joint position difference [rad]</text>"#);
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{max:.4}</text>"#, x0 - 4.0, y0 + 10.0);
    for (j, name) in joints.iter().enumerate() {
        let gx = x0 + group * j as f64 + group * 0.1;
        for (k, (_, r)) in reports.iter().enumerate() {
            let v = r.rms_position.get(j).copied().unwrap_or(0.0);
            let bh = v / max * h;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                gx + bar * k as f64,
                y0 + h - bh,
                bar,
                bh,
                COLORS[k % COLORS.len()]
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            gx + group * 0.4,
            y0 + h + 16.0,
            escape(name)
        );
    }
    for (k, (label, _)) in reports.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="380" font-size="12" fill="{}">{}</text>"#,
            70.0 + 200.0 * k as f64,
            COLORS[k % COLORS.len()],
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes the divergence reports as CSV, one row per (report, joint).
pub fn write_report_csv(reports: &[(String, DivergenceReport)], path: &Path) -> Result<()> {
    let csv_err = |e| Error::Csv { path: path.to_path_buf(), source: e };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["comparison", "joint", "rms_position", "portrait_discrepancy", "base_velocity_rms", "window_s"])
        .map_err(csv_err)?;
    for (label, r) in reports {
        for (j, name) in r.joint_names.iter().enumerate() {
            w.write_record([
                label.clone(),
                name.clone(),
                r.rms_position[j].to_string(),
                r.portrait_discrepancy[j].to_string(),
                r.base_velocity_rms.to_string(),
                r.window.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes one overlay figure per selected joint, one CSV per record, and a
/// divergence chart plus CSV when reports are given. An empty `joints`
/// selection plots every joint of the first record.
pub fn emit_plots(
    records: &[(String, TrajectoryRecord)],
    reports: &[(String, DivergenceReport)],
    joints: &[String],
    dir: impl AsRef<Path>,
) -> Result<PlotStatus> {
    if records.is_empty() && reports.is_empty() {
        return Ok(PlotStatus::NothingToPlot);
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    if let Some((_, first)) = records.first() {
        let selected: Vec<String> = if joints.is_empty() { first.joint_names.clone() } else { joints.to_vec() };
        for name in &selected {
            let j = first.joint_index(name)?;
            for (_, r) in records {
                if r.joint_names != first.joint_names {
                    return Err(Error::contract("records cover different joints"));
                }
            }
            let path = dir.join(format!("joint_{name}.svg"));
            write_file(&path, &joint_svg(records, name, j))?;
            files.push(path);
        }
        for (label, r) in records {
            let path = dir.join(format!("record_{label}.csv"));
            r.write_csv(&path)?;
            files.push(path);
        }
    }
    if !reports.is_empty() {
        let svg = dir.join("divergence.svg");
        write_file(&svg, &divergence_svg(reports))?;
        let csv = dir.join("divergence.csv");
        write_report_csv(reports, &csv)?;
        files.push(svg);
        files.push(csv);
    }
    Ok(PlotStatus::Written(files))
}
