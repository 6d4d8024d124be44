use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bipedlab::model::BackendKind;
use bipedlab::ppo::Checkpoint;
use bipedlab::sim2sim::{
    compare_trajectories, emit_plots, fit_sine, rollout_policy, sine_tracking_test, DivergenceReport, PlotStatus,
    RolloutConfig, TrajectoryRecord,
};
use bipedlab::terrain::TerrainKind;
use rayon::prelude::*;

use crate::config::Resolved;
use crate::label_of;

#[derive(Debug, Clone)]
pub struct RolloutRow {
    pub terrain: TerrainKind,
    pub label: String,
    pub samples: usize,
    pub fell: bool,
    pub diverged: bool,
    pub total_reward: f64,
}

#[derive(Debug, Clone)]
pub struct ValidateReport {
    pub rollouts: Vec<RolloutRow>,
    pub reports: Vec<(TerrainKind, String, DivergenceReport)>,
    pub files: Vec<PathBuf>,
}

impl fmt::Display for ValidateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:<12} {:>7} {:>6} {:>9} {:>12}", "terrain", "backend", "samples", "fell", "diverged", "reward")?;
        for r in &self.rollouts {
            writeln!(
                f,
                "{:<8} {:<12} {:>7} {:>6} {:>9} {:>12.4}",
                terrain_name(r.terrain),
                r.label,
                r.samples,
                r.fell,
                r.diverged,
                r.total_reward
            )?;
        }
        for (terrain, label, rep) in &self.reports {
            writeln!(f, "\n{} {label}: window {:.2} s, base velocity rms {:.5} m/s", terrain_name(*terrain), rep.window, rep.base_velocity_rms)?;
            writeln!(f, "  {:<18} {:>12} {:>12}", "joint", "rms [rad]", "portrait")?;
            for ((name, rms), p) in rep.joint_names.iter().zip(&rep.rms_position).zip(&rep.portrait_discrepancy) {
                writeln!(f, "  {name:<18} {rms:>12.6} {p:>12.4}")?;
            }
        }
        Ok(())
    }
}

fn terrain_name(t: TerrainKind) -> &'static str {
    match t {
        TerrainKind::Flat => "flat",
        TerrainKind::Uneven => "uneven",
    }
}

/// Labels backends by name, numbering repeats so self-validation keeps both records.
fn backend_labels(backends: &[BackendKind]) -> Vec<String> {
    let mut labels = Vec::with_capacity(backends.len());
    for (i, b) in backends.iter().enumerate() {
        let seen = backends[..i].iter().filter(|x| *x == b).count();
        labels.push(if seen == 0 { b.name().to_string() } else { format!("{}-{}", b.name(), seen + 1) });
    }
    labels
}

/// Compares every later record against the first.
fn pair_reports(records: &[(String, TrajectoryRecord)]) -> Result<Vec<(String, DivergenceReport)>> {
    let mut out = Vec::new();
    let Some((first_label, first)) = records.first() else { return Ok(out) };
    for (label, rec) in &records[1..] {
        if first.is_empty() || rec.is_empty() {
            continue;
        }
        out.push((format!("{first_label}-vs-{label}"), compare_trajectories(first, rec)?));
    }
    Ok(out)
}

/// Rolls the checkpoint out on every (terrain, backend) pair and writes one
/// plot directory per terrain under `dir`.
pub fn validate(r: &Resolved, checkpoint: &Path, backends: &[BackendKind], terrains: &[TerrainKind], dir: &Path) -> Result<ValidateReport> {
    if backends.is_empty() || terrains.is_empty() {
        bail!("validate needs at least one backend and one terrain");
    }
    let ckpt = Checkpoint::load(checkpoint).with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    let settings = r.env_settings();
    let labels = backend_labels(backends);
    let jobs: Vec<(TerrainKind, usize)> = terrains.iter().flat_map(|&t| (0..backends.len()).map(move |i| (t, i))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(terrain, i)| {
            let cfg = RolloutConfig { terrain, ..r.config.sim2sim.rollout.clone() };
            rollout_policy(backends[i], &ckpt, &settings, &cfg, r.config.seed)
        })
        .collect::<bipedlab::Result<Vec<_>>>()?;

    let mut report = ValidateReport { rollouts: Vec::new(), reports: Vec::new(), files: Vec::new() };
    for (ti, &terrain) in terrains.iter().enumerate() {
        let slice = &outcomes[ti * backends.len()..(ti + 1) * backends.len()];
        let mut records = Vec::new();
        for (label, o) in labels.iter().zip(slice) {
            report.rollouts.push(RolloutRow {
                terrain,
                label: label.clone(),
                samples: o.record.len(),
                fell: o.fell,
                diverged: o.diverged,
                total_reward: o.total_reward,
            });
            records.push((label.clone(), o.record.clone()));
        }
        let reports = pair_reports(&records)?;
        let status = emit_plots(&records, &reports, &[], dir.join(terrain_name(terrain)))?;
        report.files.extend(status.files().iter().cloned());
        report.reports.extend(reports.into_iter().map(|(l, rep)| (terrain, l, rep)));
    }
    Ok(report)
}

/// Sine-tracking test on each backend; writes records, overlays and fits.
pub fn sine(r: &Resolved, backends: &[BackendKind], dir: &Path, out: &mut dyn Write) -> Result<PlotStatus> {
    let cfg = &r.config.sim2sim.sine;
    let labels = backend_labels(backends);
    let mut records = Vec::new();
    for (b, label) in backends.iter().zip(&labels) {
        let o = sine_tracking_test(*b, &r.robot, &r.config.physics, cfg)?;
        if o.diverged {
            writeln!(out, "{label}: simulation diverged at t = {:.2} s", o.record.samples.last().map_or(0.0, |s| s.t))?;
        }
        writeln!(out, "{label}")?;
        writeln!(out, "  {:<18} {:>8} {:>10} {:>10}", "joint", "ratio", "lag [s]", "offset")?;
        for &j in &cfg.joints {
            let fit = fit_sine(&o.record, j, cfg.amplitude, cfg.frequency, (cfg.duration * 0.2).min(1.0))?;
            writeln!(
                out,
                "  {:<18} {:>8.4} {:>10.4} {:>10.4}",
                o.record.joint_names[j], fit.amplitude_ratio, fit.lag, fit.offset
            )?;
        }
        records.push((label.clone(), o.record));
    }
    let joints: Vec<String> = cfg.joints.iter().map(|&j| records[0].1.joint_names[j].clone()).collect();
    let reports = pair_reports(&records)?;
    let status = emit_plots(&records, &reports, &joints, dir)?;
    writeln!(out, "wrote {} files to {}", status.files().len(), dir.display())?;
    Ok(status)
}

/// Re-plots trajectory CSVs. Each record is compared against the first.
pub fn plot(paths: &[PathBuf], joints: &[String], dir: &Path, out: &mut dyn Write) -> Result<PlotStatus> {
    let mut records = Vec::with_capacity(paths.len());
    for p in paths {
        let rec = TrajectoryRecord::read_csv(p).with_context(|| format!("reading {}", p.display()))?;
        records.push((label_of(p), rec));
    }
    let reports = pair_reports(&records)?;
    let status = emit_plots(&records, &reports, joints, dir)?;
    match &status {
        PlotStatus::NothingToPlot => writeln!(out, "nothing to plot")?,
        PlotStatus::Written(files) => writeln!(out, "wrote {} files to {}", files.len(), dir.display())?,
    }
    Ok(status)
}
