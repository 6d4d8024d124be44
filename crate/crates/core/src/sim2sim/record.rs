//! 100 Hz trajectory records and their CSV form.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Simulator, JOINT_NAMES, POLICY_DT};

/// One 100 Hz sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// s
    pub t: f64,
    pub theta: Vec<f64>,
    pub theta_dot: Vec<f64>,
    /// `[x, y, z, alpha, beta, gamma]`
    pub base_pose: [f64; 6],
    /// `[vx, vz, pitch rate]` in the world frame
    pub base_vel: [f64; 3],
    /// N, `[left, right]`
    pub contact_force: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub joint_names: Vec<String>,
    pub samples: Vec<Sample>,
}

const BASE_COLUMNS: [&str; 11] = [
    "x", "y", "z", "alpha", "beta", "gamma", "vx", "vz", "pitch_rate", "force_left", "force_right",
];

impl TrajectoryRecord {
    /// Empty record over the six actuated joints.
    pub fn for_robot() -> Self {
        Self {
            joint_names: JOINT_NAMES.iter().map(|s| s.to_string()).collect(),
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends the simulator's current state stamped with `t`.
    pub fn push_state(&mut self, t: f64, sim: &Simulator<f64>) {
        let st = &sim.state;
        let js = st.joint_state();
        let contact = sim.contact_state();
        self.samples.push(Sample {
            t,
            theta: js.theta.to_vec(),
            theta_dot: js.theta_dot.to_vec(),
            base_pose: st.base_pose().to_array(),
            base_vel: [st.qd[0], st.qd[1], st.qd[2]],
            contact_force: contact.foot_force,
        });
    }

    pub fn joint_index(&self, name: &str) -> Result<usize> {
        self.joint_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownJoint {
                name: name.to_string(),
                valid: self.joint_names.clone(),
            })
    }

    /// Checks finite values and strictly increasing 0.01 s timestamps.
    pub fn validate(&self) -> Result<()> {
        let nj = self.joint_names.len();
        for (i, s) in self.samples.iter().enumerate() {
            if s.theta.len() != nj || s.theta_dot.len() != nj {
                return Err(Error::contract(format!("sample {i} has the wrong joint count")));
            }
            let finite = std::iter::once(s.t)
                .chain(s.theta.iter().copied())
                .chain(s.theta_dot.iter().copied())
                .chain(s.base_pose)
                .chain(s.base_vel)
                .chain(s.contact_force)
                .all(f64::is_finite);
            if !finite {
                return Err(Error::NonFinite(format!("record sample {i}")));
            }
            if i > 0 {
                let dt = s.t - self.samples[i - 1].t;
                if (dt - POLICY_DT).abs() > 1e-9 {
                    return Err(Error::contract(format!("sample {i} is {dt} s after its predecessor")));
                }
            }
        }
        Ok(())
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend(self.joint_names.iter().map(|n| format!("theta_{n}")));
        h.extend(self.joint_names.iter().map(|n| format!("theta_dot_{n}")));
        h.extend(BASE_COLUMNS.iter().map(|s| s.to_string()));
        h
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |e| Error::Csv { path: path.to_path_buf(), source: e };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(self.csv_header()).map_err(csv_err)?;
        for s in &self.samples {
            let row = std::iter::once(s.t)
                .chain(s.theta.iter().copied())
                .chain(s.theta_dot.iter().copied())
                .chain(s.base_pose)
                .chain(s.base_vel)
                .chain(s.contact_force)
                .map(|v| v.to_string());
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let csv_err = |e| Error::Csv { path: path.to_path_buf(), source: e };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let bad = |m: String| Error::Contract(format!("{}: {m}", path.display()));
        if header.len() < 1 + BASE_COLUMNS.len() || !(header.len() - 1 - BASE_COLUMNS.len()).is_multiple_of(2) {
            return Err(bad("unexpected column count".into()));
        }
        let nj = (header.len() - 1 - BASE_COLUMNS.len()) / 2;
        let joint_names: Vec<String> = header[1..1 + nj]
            .iter()
            .map(|h| h.strip_prefix("theta_").map(str::to_string).ok_or_else(|| bad(format!("bad column `{h}`"))))
            .collect::<Result<_>>()?;
        let mut rec = TrajectoryRecord { joint_names, samples: Vec::new() };
        if rec.csv_header() != header {
            return Err(bad("header does not match the record layout".into()));
        }
        for row in r.records() {
            let row = row.map_err(csv_err)?;
            let v: Vec<f64> = row
                .iter()
                .map(|c| c.parse::<f64>().map_err(|e| bad(format!("`{c}`: {e}"))))
                .collect::<Result<_>>()?;
            let base = &v[1 + 2 * nj..];
            rec.samples.push(Sample {
                t: v[0],
                theta: v[1..1 + nj].to_vec(),
                theta_dot: v[1 + nj..1 + 2 * nj].to_vec(),
                base_pose: base[..6].try_into().expect("six"),
                base_vel: base[6..9].try_into().expect("three"),
                contact_force: base[9..11].try_into().expect("two"),
            });
        }
        Ok(rec)
    }
}
