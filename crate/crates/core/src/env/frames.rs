//! Observation and privileged-state frames, with their fixed scalar layouts.
//!
//! The planar robot drives six joints but frames keep a twelve-joint layout
//! (per leg: hip yaw, hip roll, hip pitch, knee, ankle pitch, ankle roll,
//! left leg first). Unused slots read zero.

use crate::gait::StanceMask;
use crate::model::NUM_ACTUATED;

pub const FRAME_JOINTS: usize = 12;
pub const ACTION_DIM: usize = FRAME_JOINTS;
/// Slots of the actuated joints within the twelve-joint layout.
pub const JOINT_SLOTS: [usize; NUM_ACTUATED] = [2, 3, 4, 8, 9, 10];

pub const OBS_FRAME_LEN: usize = 47;
pub const PRIV_FRAME_LEN: usize = 73;
pub const OBS_STACK_DEPTH: usize = 15;
pub const PRIV_STACK_DEPTH: usize = 3;
pub const OBS_DIM: usize = OBS_FRAME_LEN * OBS_STACK_DEPTH;
pub const PRIV_DIM: usize = PRIV_FRAME_LEN * PRIV_STACK_DEPTH;

/// `(field, length)` in frame order.
pub const OBS_LAYOUT: [(&str, usize); 7] = [
    ("clock", 2),
    ("command", 3),
    ("joint_pos", FRAME_JOINTS),
    ("joint_vel", FRAME_JOINTS),
    ("base_ang_vel", 3),
    ("base_euler", 3),
    ("last_action", ACTION_DIM),
];

/// Noise-free copies of the observation fields followed by simulator-only state.
pub const PRIV_EXTRA_LAYOUT: [(&str, usize); 8] = [
    ("friction", 1),
    ("body_mass_delta", 1),
    ("base_lin_vel", 3),
    ("push_force", 2),
    ("push_torque", 3),
    ("tracking_diff", FRAME_JOINTS),
    ("stance_mask", 2),
    ("contact", 2),
];

/// Human-readable layout listing: one `frame offset length field` line per field.
pub fn layout_listing() -> String {
    let mut out = String::new();
    let mut offset = 0;
    for (name, len) in OBS_LAYOUT {
        out.push_str(&format!("obs {offset} {len} {name}\n"));
        offset += len;
    }
    out.push_str(&format!("obs_total {offset}\n"));
    offset = 0;
    for (name, len) in OBS_LAYOUT.iter().chain(PRIV_EXTRA_LAYOUT.iter()) {
        out.push_str(&format!("priv {offset} {len} {name}\n"));
        offset += len;
    }
    out.push_str(&format!("priv_total {offset}\n"));
    out.push_str(&format!("obs_stack {OBS_STACK_DEPTH} {OBS_DIM}\n"));
    out.push_str(&format!("priv_stack {PRIV_STACK_DEPTH} {PRIV_DIM}\n"));
    out
}

/// Spreads actuated-joint values into the twelve-joint layout.
pub fn to_frame_joints(v: &[f64; NUM_ACTUATED]) -> [f64; FRAME_JOINTS] {
    let mut out = [0.0; FRAME_JOINTS];
    for (slot, x) in JOINT_SLOTS.iter().zip(v.iter()) {
        out[*slot] = *x;
    }
    out
}

/// Picks the actuated entries out of a twelve-joint vector.
pub fn from_frame_joints(v: &[f64]) -> [f64; NUM_ACTUATED] {
    JOINT_SLOTS.map(|slot| v[slot])
}

/// Ground-truth quantities shared by both frames.
#[derive(Debug, Clone, Copy)]
pub struct ProprioState<'a> {
    pub clock: (f64, f64),
    pub command: [f64; 3],
    pub theta: [f64; NUM_ACTUATED],
    pub theta_dot: [f64; NUM_ACTUATED],
    pub ang_vel: [f64; 3],
    pub euler: [f64; 3],
    pub last_action: &'a [f64; ACTION_DIM],
}

#[derive(Debug, Clone, Copy)]
pub struct PrivilegedExtras {
    pub friction: f64,
    pub body_mass_delta: f64,
    pub lin_vel: [f64; 3],
    pub push_force: [f64; 2],
    pub push_torque: [f64; 3],
    /// θ − θ_ref over the actuated joints
    pub tracking_diff: [f64; NUM_ACTUATED],
    pub stance_mask: StanceMask,
    pub contact: [bool; 2],
}

struct Writer<'a> {
    buf: &'a mut [f64],
    pos: usize,
}

impl Writer<'_> {
    fn put(&mut self, vals: &[f64]) {
        self.buf[self.pos..self.pos + vals.len()].copy_from_slice(vals);
        self.pos += vals.len();
    }
}

fn write_proprio(w: &mut Writer<'_>, s: &ProprioState<'_>, noise: Option<&super::ObservationNoise<NUM_ACTUATED>>) {
    let mut theta = s.theta;
    let mut theta_dot = s.theta_dot;
    let mut ang_vel = s.ang_vel;
    let mut euler = s.euler;
    if let Some(n) = noise {
        for i in 0..NUM_ACTUATED {
            theta[i] += n.joint_pos[i];
            theta_dot[i] += n.joint_vel[i];
        }
        for i in 0..3 {
            ang_vel[i] += n.ang_vel[i];
            euler[i] += n.euler[i];
        }
    }
    w.put(&[s.clock.0, s.clock.1]);
    w.put(&s.command);
    w.put(&to_frame_joints(&theta));
    w.put(&to_frame_joints(&theta_dot));
    w.put(&ang_vel);
    w.put(&euler);
    w.put(s.last_action);
}

pub fn observation_frame(s: &ProprioState<'_>, noise: Option<&super::ObservationNoise<NUM_ACTUATED>>) -> [f64; OBS_FRAME_LEN] {
    let mut out = [0.0; OBS_FRAME_LEN];
    let mut w = Writer { buf: &mut out, pos: 0 };
    write_proprio(&mut w, s, noise);
    debug_assert_eq!(w.pos, OBS_FRAME_LEN);
    out
}

pub fn privileged_frame(s: &ProprioState<'_>, x: &PrivilegedExtras) -> [f64; PRIV_FRAME_LEN] {
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut out = [0.0; PRIV_FRAME_LEN];
    let mut w = Writer { buf: &mut out, pos: 0 };
    write_proprio(&mut w, s, None);
    w.put(&[x.friction, x.body_mass_delta]);
    w.put(&x.lin_vel);
    w.put(&x.push_force);
    w.put(&x.push_torque);
    w.put(&to_frame_joints(&x.tracking_diff));
    w.put(&x.stance_mask.map(flag));
    w.put(&x.contact.map(flag));
    debug_assert_eq!(w.pos, PRIV_FRAME_LEN);
    out
}

/// Fixed-depth history of frames, flattened oldest-first (most recent last).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    frame_len: usize,
    depth: usize,
    data: Vec<f64>,
}

impl FrameStack {
    pub fn new(frame_len: usize, depth: usize) -> Self {
        Self {
            frame_len,
            depth,
            data: vec![0.0; frame_len * depth],
        }
    }

    /// Fills every slot with `frame` (episode start).
    pub fn fill(&mut self, frame: &[f64]) {
        assert_eq!(frame.len(), self.frame_len);
        for chunk in self.data.chunks_exact_mut(self.frame_len) {
            chunk.copy_from_slice(frame);
        }
    }

    pub fn push(&mut self, frame: &[f64]) {
        assert_eq!(frame.len(), self.frame_len);
        self.data.copy_within(self.frame_len.., 0);
        let start = self.frame_len * (self.depth - 1);
        self.data[start..].copy_from_slice(frame);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn latest(&self) -> &[f64] {
        &self.data[self.frame_len * (self.depth - 1)..]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}
