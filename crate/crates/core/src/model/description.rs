//! Robot description: link geometry, inertial parameters and joint servos.
//!
//! The description is plain data in SI units and is loaded from a sectioned
//! key-value (TOML) file. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of actuated joints in the planar model.
pub const NUM_ACTUATED: usize = 6;

/// Actuated joint names in state order.
pub const JOINT_NAMES: [&str; NUM_ACTUATED] = [
    "left_hip_pitch",
    "left_knee",
    "left_ankle_pitch",
    "right_hip_pitch",
    "right_knee",
    "right_ankle_pitch",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsoParams {
    /// kg
    pub mass: f64,
    /// kg·m², about the center of mass
    pub inertia: f64,
    /// m, center of mass above the hip axis
    pub com_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkParams {
    /// m, joint to joint
    pub length: f64,
    /// kg
    pub mass: f64,
    /// kg·m², about the center of mass
    pub inertia: f64,
    /// m, center of mass distance from the proximal joint
    pub com_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FootParams {
    /// kg
    pub mass: f64,
    /// kg·m², about the center of mass
    pub inertia: f64,
    /// m, sole below the ankle axis
    pub ankle_height: f64,
    /// m, toe contact point ahead of the ankle
    pub toe_length: f64,
    /// m, heel contact point behind the ankle
    pub heel_length: f64,
    /// m, center of mass ahead of the ankle (it sits halfway down to the sole)
    pub com_forward: f64,
}

/// Per-joint arrays, ordered as [`JOINT_NAMES`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointParams {
    /// rad
    pub lower_limit: [f64; NUM_ACTUATED],
    /// rad
    pub upper_limit: [f64; NUM_ACTUATED],
    /// N·m
    pub torque_limit: [f64; NUM_ACTUATED],
    /// N·m/rad
    pub kp: [f64; NUM_ACTUATED],
    /// N·m·s/rad
    pub kd: [f64; NUM_ACTUATED],
    /// rad, nominal standing pose θ₀
    pub standing_pose: [f64; NUM_ACTUATED],
    /// kg·m², reflected rotor inertia added to the joint diagonal
    pub armature: [f64; NUM_ACTUATED],
    /// N·m·s/rad, passive viscous friction
    pub damping: [f64; NUM_ACTUATED],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotDescription {
    pub torso: TorsoParams,
    pub thigh: LinkParams,
    pub shank: LinkParams,
    pub foot: FootParams,
    pub joints: JointParams,
}

impl Default for RobotDescription {
    /// Desk-scale planar biped: 30 kg total, hip axis ~0.70 m above the
    /// sole in the standing pose.
    fn default() -> Self {
        Self {
            torso: TorsoParams {
                mass: 14.0,
                inertia: 0.24,
                com_height: 0.1,
            },
            thigh: LinkParams {
                length: 0.33,
                mass: 4.0,
                inertia: 0.036,
                com_offset: 0.15,
            },
            shank: LinkParams {
                length: 0.33,
                mass: 3.0,
                inertia: 0.027,
                com_offset: 0.15,
            },
            foot: FootParams {
                mass: 1.0,
                inertia: 0.004,
                ankle_height: 0.05,
                toe_length: 0.14,
                heel_length: 0.06,
                com_forward: 0.03,
            },
            joints: JointParams {
                lower_limit: [-1.6, 0.0, -0.9, -1.6, 0.0, -0.9],
                upper_limit: [1.0, 2.3, 0.9, 1.0, 2.3, 0.9],
                torque_limit: [80.0; NUM_ACTUATED],
                kp: [150.0, 150.0, 80.0, 150.0, 150.0, 80.0],
                kd: [2.0; NUM_ACTUATED],
                standing_pose: [-0.05, 0.1, -0.05, -0.05, 0.1, -0.05],
                armature: [0.01; NUM_ACTUATED],
                damping: [0.1; NUM_ACTUATED],
            },
        }
    }
}

impl RobotDescription {
    pub fn total_mass(&self) -> f64 {
        self.torso.mass + 2.0 * (self.thigh.mass + self.shank.mass + self.foot.mass)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("torso.mass", self.torso.mass),
            ("torso.inertia", self.torso.inertia),
            ("thigh.length", self.thigh.length),
            ("thigh.mass", self.thigh.mass),
            ("thigh.inertia", self.thigh.inertia),
            ("shank.length", self.shank.length),
            ("shank.mass", self.shank.mass),
            ("shank.inertia", self.shank.inertia),
            ("foot.mass", self.foot.mass),
            ("foot.inertia", self.foot.inertia),
            ("foot.ankle_height", self.foot.ankle_height),
            ("foot.toe_length", self.foot.toe_length),
            ("foot.heel_length", self.foot.heel_length),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("torso.com_height", self.torso.com_height),
            ("thigh.com_offset", self.thigh.com_offset),
            ("shank.com_offset", self.shank.com_offset),
            ("foot.com_forward", self.foot.com_forward),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        let j = &self.joints;
        for i in 0..NUM_ACTUATED {
            let name = JOINT_NAMES[i];
            if !(j.torque_limit[i] > 0.0) {
                return Err(Error::Config(format!("joints.torque_limit[{name}] must be > 0")));
            }
            if !(j.kp[i] >= 0.0 && j.kd[i] >= 0.0) {
                return Err(Error::Config(format!("joints.kp/kd[{name}] must be >= 0")));
            }
            if !(j.armature[i] >= 0.0 && j.damping[i] >= 0.0) {
                return Err(Error::Config(format!(
                    "joints.armature/damping[{name}] must be >= 0"
                )));
            }
            if !(j.lower_limit[i] < j.upper_limit[i]) {
                return Err(Error::Config(format!(
                    "joints limits for {name} must satisfy lower < upper"
                )));
            }
            let p = j.standing_pose[i];
            if !(p >= j.lower_limit[i] && p <= j.upper_limit[i]) {
                return Err(Error::Config(format!(
                    "joints.standing_pose[{name}] = {p} outside limits"
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let desc: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        desc.validate()?;
        Ok(desc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("robot description serializes")
    }
}
