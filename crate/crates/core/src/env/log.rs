//! Appendable per-step episode log.

use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::rewards::{RewardTerms, TERM_NAMES};

use super::Env;

/// Writes one CSV row per environment step: step index, weighted reward
/// terms, total, and the base state.
pub struct EpisodeLogger {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl EpisodeLogger {
    /// Opens `path` for appending, writing the header only when the file is new or empty.
    pub fn append(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let empty = file.metadata().map_err(|e| Error::io(&path, e))?.len() == 0;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if empty {
            let mut header = vec!["episode", "step"];
            header.extend(TERM_NAMES);
            header.extend(["total", "x", "z", "pitch", "vx", "vz", "pitch_rate"]);
            writer
                .write_record(&header)
                .map_err(|e| Error::Csv { path: path.clone(), source: e })?;
        }
        Ok(Self { path, writer })
    }

    pub fn record(&mut self, episode: usize, env: &Env, rewards: &RewardTerms<f64>) -> Result<()> {
        let st = &env.simulator().state;
        let mut row = vec![episode.to_string(), env.steps().to_string()];
        row.extend(rewards.weighted.iter().map(|v| v.to_string()));
        row.push(rewards.total.to_string());
        for v in [st.q[0], st.q[1], st.q[2], st.qd[0], st.qd[1], st.qd[2]] {
            row.push(v.to_string());
        }
        self.writer
            .write_record(&row)
            .map_err(|e| Error::Csv { path: self.path.clone(), source: e })
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}
