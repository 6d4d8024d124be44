use crate::scalar::Real;

use super::description::NUM_ACTUATED;

/// Generalized coordinates: base x, base z, torso pitch, then the six joints.
pub const NUM_DOF: usize = 3 + NUM_ACTUATED;
/// Index of the first joint coordinate in `q`.
pub const JOINT_OFFSET: usize = 3;
/// Contact points: left heel, left toe, right heel, right toe.
pub const NUM_CONTACT_POINTS: usize = 4;

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut w = a - two_pi * ((a + T::PI()) / two_pi).floor();
    // floor maps +π to -π; flip it back to keep the interval half-open on the left
    if w <= -T::PI() {
        w = w + two_pi;
    }
    w
}

/// Full simulator state. Base position is the hip axis point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState<T> {
    pub q: [T; NUM_DOF],
    pub qd: [T; NUM_DOF],
    /// Stiction anchors (world x) of the contact points currently on the ground.
    pub anchors: [Option<T>; NUM_CONTACT_POINTS],
    /// Number of 1 kHz ticks taken since reset.
    pub tick: u64,
}

impl<T: Real> SimState<T> {
    pub fn zeroed() -> Self {
        Self {
            q: [T::zero(); NUM_DOF],
            qd: [T::zero(); NUM_DOF],
            anchors: [None; NUM_CONTACT_POINTS],
            tick: 0,
        }
    }

    pub fn base_pose(&self) -> BasePose<T> {
        BasePose {
            x: self.q[0],
            y: T::zero(),
            z: self.q[1],
            alpha: T::zero(),
            beta: wrap_angle(self.q[2]),
            gamma: T::zero(),
        }
    }

    /// World-frame base linear velocity `[vx, vy, vz]`.
    pub fn base_linear_velocity(&self) -> [T; 3] {
        [self.qd[0], T::zero(), self.qd[1]]
    }

    /// Base Euler rates `[α̇, β̇, γ̇]`.
    pub fn base_angular_velocity(&self) -> [T; 3] {
        [T::zero(), self.qd[2], T::zero()]
    }

    pub fn joint_state(&self) -> JointState<T> {
        let mut js = JointState {
            theta: [T::zero(); NUM_ACTUATED],
            theta_dot: [T::zero(); NUM_ACTUATED],
        };
        js.theta.copy_from_slice(&self.q[JOINT_OFFSET..]);
        js.theta_dot.copy_from_slice(&self.qd[JOINT_OFFSET..]);
        js
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qd.iter()).all(|v| v.is_finite())
    }
}

/// `[x, y, z, α, β, γ]`; the sagittal model keeps `y`, `α`, `γ` at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePose<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Copy> BasePose<T> {
    pub fn euler(&self) -> [T; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.x, self.y, self.z, self.alpha, self.beta, self.gamma]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState<T> {
    pub theta: [T; NUM_ACTUATED],
    pub theta_dot: [T; NUM_ACTUATED],
}

/// Foot normal forces (N) and thresholded contact flags, `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactState<T> {
    pub foot_force: [T; 2],
    pub in_contact: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalDisturbance<T> {
    /// Horizontal push `[fx, fy]` at the torso center of mass, N.
    pub push_force: [T; 2],
    /// `[τx, τy, τz]` on the torso, N·m. Only the pitch component acts in the plane.
    pub push_torque: [T; 3],
}

impl<T: Real> ExternalDisturbance<T> {
    pub fn none() -> Self {
        Self {
            push_force: [T::zero(); 2],
            push_torque: [T::zero(); 3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.push_force
            .iter()
            .chain(self.push_torque.iter())
            .all(|v| v.is_finite())
    }
}

impl<T: Real> Default for ExternalDisturbance<T> {
    fn default() -> Self {
        Self::none()
    }
}
