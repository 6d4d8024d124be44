use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use bipedlab::ppo::{Checkpoint, IterationMetrics, MetricsWriter, Trainer};

use crate::config::Resolved;

/// What a finished (or aborted) training run left behind.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub run_dir: PathBuf,
    pub metrics: Vec<IterationMetrics>,
    /// Checkpoints written during the run, oldest first.
    pub checkpoints: Vec<PathBuf>,
}

/// `<root>/<timestamp>-seed<N>`, suffixed when two runs start in the same second.
fn create_run_dir(root: &Path, seed: u64) -> Result<PathBuf> {
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S");
    std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
    let base = format!("{stamp}-seed{seed}");
    let mut n = 0;
    loop {
        let name = if n == 0 { base.clone() } else { format!("{base}-{n}") };
        let dir = root.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => n += 1,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
}

/// Trains for the configured number of iterations. If an iteration fails
/// the last good weights are still saved as `policy.bin` before the error
/// is returned.
pub fn train(r: &Resolved, out: &mut dyn Write) -> Result<TrainReport> {
    let c = &r.config;
    let run_dir = create_run_dir(&c.out_dir, c.seed)?;
    r.write_to(&run_dir)?;
    writeln!(out, "run directory: {}", run_dir.display())?;

    let settings = Arc::new(r.env_settings());
    let mut trainer = Trainer::new(c.ppo.clone(), settings, c.backend, c.seed)?;
    let mut writer = MetricsWriter::create(run_dir.join("metrics.csv"))?;
    let mut report = TrainReport {
        run_dir: run_dir.clone(),
        metrics: Vec::with_capacity(c.train.iterations),
        checkpoints: Vec::new(),
    };
    let mut last_good: Checkpoint = trainer.checkpoint();

    for _ in 0..c.train.iterations {
        let m = match trainer.iterate() {
            Ok(m) => m,
            Err(e) => {
                let path = run_dir.join("policy.bin");
                last_good.save(&path)?;
                report.checkpoints.push(path);
                return Err(e).with_context(|| {
                    format!(
                        "training stopped at iteration {}; last good checkpoint (iteration {}) kept in {}",
                        trainer.iteration() + 1,
                        last_good.iteration,
                        run_dir.display()
                    )
                });
            }
        };
        writer.write(&m)?;
        writeln!(
            out,
            "iter {:>4}  return {:>9.3}  length {:>7.1}  step reward {:>7.4}  kl {:.2e}  std {:.3}",
            m.iteration, m.mean_return, m.mean_episode_length, m.mean_step_reward, m.update.approx_kl, m.action_std
        )?;
        last_good = trainer.checkpoint();
        if m.iteration % c.train.checkpoint_interval == 0 {
            let path = run_dir.join(format!("checkpoint_{:05}.bin", m.iteration));
            last_good.save(&path)?;
            report.checkpoints.push(path);
        }
        report.metrics.push(m);
    }
    let path = run_dir.join("policy.bin");
    last_good.save(&path)?;
    report.checkpoints.push(path);
    Ok(report)
}
