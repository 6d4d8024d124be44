//! Planar floating-base multibody dynamics.
//!
//! Seven rigid links (torso, and thigh/shank/foot per leg) in the x-z plane.
//! Every link angle is a linear combination of the generalized coordinates,
//! so the equations of motion follow from projecting Newton-Euler onto the
//! point Jacobians:
//!
//! `M(q) q̈ = Σ Jᵀ F_ext + τ_joint + g(q) − Σ m Jᵀ (J̇ q̇)`.
//!
//! Planar bodies have no gyroscopic term and their angular Jacobians are
//! constant, so the velocity-product term only comes from the point
//! accelerations `−φ̇² w` of each rotating lever arm `w`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::terrain::Terrain;

use super::description::{RobotDescription, NUM_ACTUATED};
use super::state::{
    ContactState, ExternalDisturbance, SimState, JOINT_OFFSET, NUM_CONTACT_POINTS, NUM_DOF,
};

pub const NUM_BODIES: usize = 7;
pub const TORSO: usize = 0;

/// Coordinates that rotate each body, in body order
/// torso, L thigh, L shank, L foot, R thigh, R shank, R foot.
const CHAINS: [&[usize]; NUM_BODIES] = [
    &[2],
    &[2, 3],
    &[2, 3, 4],
    &[2, 3, 4, 5],
    &[2, 6],
    &[2, 6, 7],
    &[2, 6, 7, 8],
];

/// Penalty contact, Coulomb friction and simulation switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    /// m/s²
    pub gravity: f64,
    pub contact_enabled: bool,
    /// N/m
    pub contact_stiffness: f64,
    /// N·s/m
    pub contact_damping: f64,
    /// N/m, stiction spring
    pub tangential_stiffness: f64,
    /// N·s/m
    pub tangential_damping: f64,
    /// N, contact flag threshold ε_F
    pub contact_threshold: f64,
    /// Coulomb coefficient when not randomized
    pub friction: f64,
    /// Pins the hip point and torso in space ("suspended" robot).
    pub fixed_base: bool,
    /// N·m/rad, restoring spring beyond a joint limit
    pub limit_stiffness: f64,
    /// N·m·s/rad
    pub limit_damping: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            contact_enabled: true,
            contact_stiffness: 2.0e4,
            contact_damping: 200.0,
            tangential_stiffness: 2.0e4,
            tangential_damping: 200.0,
            contact_threshold: 1.0,
            friction: 1.0,
            fixed_base: false,
            limit_stiffness: 500.0,
            limit_damping: 5.0,
        }
    }
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("gravity", self.gravity),
            ("contact_stiffness", self.contact_stiffness),
            ("contact_damping", self.contact_damping),
            ("tangential_stiffness", self.tangential_stiffness),
            ("tangential_damping", self.tangential_damping),
            ("contact_threshold", self.contact_threshold),
            ("friction", self.friction),
            ("limit_stiffness", self.limit_stiffness),
            ("limit_damping", self.limit_damping),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("physics.{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Body<T> {
    mass: T,
    inertia: T,
}

/// Runtime model: description and physics constants in the working scalar,
/// plus the per-episode physical parameters (friction, payload).
#[derive(Debug, Clone)]
pub struct Model<T> {
    bodies: [Body<T>; NUM_BODIES],
    torso_com: T,
    thigh_len: T,
    thigh_com: T,
    shank_len: T,
    shank_com: T,
    ankle_height: T,
    toe: T,
    heel: T,
    foot_com_fwd: T,
    pub gravity: T,
    pub contact_enabled: bool,
    pub contact_stiffness: T,
    pub contact_damping: T,
    pub tangential_stiffness: T,
    pub tangential_damping: T,
    pub contact_threshold: T,
    pub friction: T,
    pub fixed_base: bool,
    limit_stiffness: T,
    limit_damping: T,
    pub lower_limit: [T; NUM_ACTUATED],
    pub upper_limit: [T; NUM_ACTUATED],
    pub torque_limit: [T; NUM_ACTUATED],
    pub kp: [T; NUM_ACTUATED],
    pub kd: [T; NUM_ACTUATED],
    pub standing_pose: [T; NUM_ACTUATED],
    armature: [T; NUM_ACTUATED],
    joint_damping: [T; NUM_ACTUATED],
    payload: T,
    pub terrain: Terrain,
}

fn arr<T: Real>(a: &[f64; NUM_ACTUATED]) -> [T; NUM_ACTUATED] {
    a.map(T::lit)
}

impl<T: Real> Model<T> {
    pub fn new(desc: &RobotDescription, physics: &PhysicsConfig, terrain: Terrain) -> Result<Self> {
        desc.validate()?;
        physics.validate()?;
        let body = |m: f64, i: f64| Body {
            mass: T::lit(m),
            inertia: T::lit(i),
        };
        let leg = [
            body(desc.thigh.mass, desc.thigh.inertia),
            body(desc.shank.mass, desc.shank.inertia),
            body(desc.foot.mass, desc.foot.inertia),
        ];
        let j = &desc.joints;
        Ok(Self {
            bodies: [
                body(desc.torso.mass, desc.torso.inertia),
                leg[0].clone(),
                leg[1].clone(),
                leg[2].clone(),
                leg[0].clone(),
                leg[1].clone(),
                leg[2].clone(),
            ],
            torso_com: T::lit(desc.torso.com_height),
            thigh_len: T::lit(desc.thigh.length),
            thigh_com: T::lit(desc.thigh.com_offset),
            shank_len: T::lit(desc.shank.length),
            shank_com: T::lit(desc.shank.com_offset),
            ankle_height: T::lit(desc.foot.ankle_height),
            toe: T::lit(desc.foot.toe_length),
            heel: T::lit(desc.foot.heel_length),
            foot_com_fwd: T::lit(desc.foot.com_forward),
            gravity: T::lit(physics.gravity),
            contact_enabled: physics.contact_enabled,
            contact_stiffness: T::lit(physics.contact_stiffness),
            contact_damping: T::lit(physics.contact_damping),
            tangential_stiffness: T::lit(physics.tangential_stiffness),
            tangential_damping: T::lit(physics.tangential_damping),
            contact_threshold: T::lit(physics.contact_threshold),
            friction: T::lit(physics.friction),
            fixed_base: physics.fixed_base,
            limit_stiffness: T::lit(physics.limit_stiffness),
            limit_damping: T::lit(physics.limit_damping),
            lower_limit: arr(&j.lower_limit),
            upper_limit: arr(&j.upper_limit),
            torque_limit: arr(&j.torque_limit),
            kp: arr(&j.kp),
            kd: arr(&j.kd),
            standing_pose: arr(&j.standing_pose),
            armature: arr(&j.armature),
            joint_damping: arr(&j.damping),
            payload: T::zero(),
            terrain,
        })
    }

    /// Adds `kg` to the torso mass (payload randomization). Replaces any previous payload.
    pub fn set_payload(&mut self, kg: T) {
        self.bodies[TORSO].mass = self.bodies[TORSO].mass - self.payload + kg;
        self.payload = kg;
    }

    pub fn payload(&self) -> T {
        self.payload
    }

    pub fn total_mass(&self) -> T {
        self.bodies.iter().fold(T::zero(), |acc, b| acc + b.mass)
    }

    fn terrain_height(&self, x: T) -> T {
        T::lit(self.terrain.height(x.as_f64()))
    }

    pub fn kinematics(&self, q: &[T; NUM_DOF], qd: &[T; NUM_DOF]) -> Kinematics<T> {
        let mut angle = [T::zero(); NUM_BODIES];
        let mut omega = [T::zero(); NUM_BODIES];
        for b in 0..NUM_BODIES {
            for &c in CHAINS[b] {
                angle[b] = angle[b] + q[c];
                omega[b] = omega[b] + qd[c];
            }
        }
        let z = T::zero();
        let hip = Point::origin(q[0], q[1]);
        let seg = |p: &Point<T>, b: usize, v: [T; 2]| p.extend(b, angle[b], omega[b], v);

        let torso = seg(&hip, TORSO, [z, self.torso_com]);
        let mut com = [torso.clone(), torso.clone(), torso.clone(), torso.clone(), torso.clone(), torso.clone(), torso];
        let mut contact = [hip.clone(), hip.clone(), hip.clone(), hip.clone()];
        for (leg, base) in [(0usize, 1usize), (1, 4)] {
            let (thigh, shank, foot) = (base, base + 1, base + 2);
            com[thigh] = seg(&hip, thigh, [z, -self.thigh_com]);
            let knee = seg(&hip, thigh, [z, -self.thigh_len]);
            com[shank] = seg(&knee, shank, [z, -self.shank_com]);
            let ankle = seg(&knee, shank, [z, -self.shank_len]);
            let half = T::lit(0.5);
            com[foot] = seg(&ankle, foot, [self.foot_com_fwd, -self.ankle_height * half]);
            contact[2 * leg] = seg(&ankle, foot, [-self.heel, -self.ankle_height]);
            contact[2 * leg + 1] = seg(&ankle, foot, [self.toe, -self.ankle_height]);
        }
        Kinematics {
            angle,
            omega,
            com,
            contact,
        }
    }

    /// Normal and tangential force at every contact point.
    pub fn contact_forces(&self, kin: &Kinematics<T>, qd: &[T; NUM_DOF], anchors: &[Option<T>; NUM_CONTACT_POINTS]) -> [PointForce<T>; NUM_CONTACT_POINTS] {
        let mut out = [PointForce::default(); NUM_CONTACT_POINTS];
        if !self.contact_enabled {
            return out;
        }
        for (i, p) in kin.contact.iter().enumerate() {
            let depth = self.terrain_height(p.pos[0]) - p.pos[1];
            out[i].depth = depth;
            if depth <= T::zero() {
                continue;
            }
            let v = p.velocity(qd);
            let normal = (self.contact_stiffness * depth - self.contact_damping * v[1]).max(T::zero());
            let raw = match anchors[i] {
                Some(a) => -self.tangential_stiffness * (p.pos[0] - a) - self.tangential_damping * v[0],
                None => -self.tangential_damping * v[0],
            };
            let cap = self.friction * normal;
            out[i].normal = normal;
            out[i].tangential = raw.max(-cap).min(cap);
        }
        out
    }

    /// Mass matrix and right-hand side of `M q̈ = rhs` for the given joint torques.
    pub fn equations_of_motion(
        &self,
        state: &SimState<T>,
        q: &[T; NUM_DOF],
        qd: &[T; NUM_DOF],
        joint_torques: &[T; NUM_ACTUATED],
        disturbance: &ExternalDisturbance<T>,
    ) -> ([[T; NUM_DOF]; NUM_DOF], [T; NUM_DOF]) {
        let kin = self.kinematics(q, qd);
        let mut m = [[T::zero(); NUM_DOF]; NUM_DOF];
        let mut rhs = [T::zero(); NUM_DOF];
        for (b, body) in self.bodies.iter().enumerate() {
            let p = &kin.com[b];
            for r in 0..NUM_DOF {
                let jr = p.jac[r];
                if jr[0] == T::zero() && jr[1] == T::zero() {
                    continue;
                }
                for c in r..NUM_DOF {
                    let jc = p.jac[c];
                    m[r][c] = m[r][c] + body.mass * (jr[0] * jc[0] + jr[1] * jc[1]);
                }
                // gravity minus velocity-product inertial force
                let fx = -body.mass * p.acc_vp[0];
                let fz = -body.mass * (self.gravity + p.acc_vp[1]);
                rhs[r] = rhs[r] + jr[0] * fx + jr[1] * fz;
            }
            let chain = CHAINS[b];
            for (i, &r) in chain.iter().enumerate() {
                for &c in &chain[i..] {
                    let (lo, hi) = if r <= c { (r, c) } else { (c, r) };
                    m[lo][hi] = m[lo][hi] + body.inertia;
                }
            }
        }
        for r in 0..NUM_DOF {
            for c in 0..r {
                m[r][c] = m[c][r];
            }
        }
        for j in 0..NUM_ACTUATED {
            let k = JOINT_OFFSET + j;
            m[k][k] = m[k][k] + self.armature[j];
            let (theta, omega) = (q[k], qd[k]);
            let mut tau = joint_torques[j] - self.joint_damping[j] * omega;
            if theta < self.lower_limit[j] {
                tau = tau + self.limit_stiffness * (self.lower_limit[j] - theta) - self.limit_damping * omega;
            } else if theta > self.upper_limit[j] {
                tau = tau + self.limit_stiffness * (self.upper_limit[j] - theta) - self.limit_damping * omega;
            }
            rhs[k] = rhs[k] + tau;
        }
        let forces = self.contact_forces(&kin, qd, &state.anchors);
        for (p, f) in kin.contact.iter().zip(forces.iter()) {
            if f.normal == T::zero() && f.tangential == T::zero() {
                continue;
            }
            for r in 0..NUM_DOF {
                rhs[r] = rhs[r] + p.jac[r][0] * f.tangential + p.jac[r][1] * f.normal;
            }
        }
        let torso = &kin.com[TORSO];
        for r in 0..NUM_DOF {
            rhs[r] = rhs[r] + torso.jac[r][0] * disturbance.push_force[0];
        }
        rhs[2] = rhs[2] + disturbance.push_torque[1];
        (m, rhs)
    }

    /// Generalized accelerations at `(q, qd)` with the anchors of `state`.
    pub fn accelerations(
        &self,
        state: &SimState<T>,
        q: &[T; NUM_DOF],
        qd: &[T; NUM_DOF],
        joint_torques: &[T; NUM_ACTUATED],
        disturbance: &ExternalDisturbance<T>,
    ) -> Result<[T; NUM_DOF]> {
        let (m, rhs) = self.equations_of_motion(state, q, qd, joint_torques, disturbance);
        let start = if self.fixed_base { JOINT_OFFSET } else { 0 };
        let mut qdd = [T::zero(); NUM_DOF];
        solve_spd(&m, &rhs, start, &mut qdd)
            .ok_or(Error::Diverged { tick: state.tick })?;
        Ok(qdd)
    }

    /// Moves stiction anchors after an integration step: new contacts anchor
    /// where they land, sliding contacts drag their anchor to the friction cone.
    pub fn update_anchors(&self, state: &mut SimState<T>) {
        let kin = self.kinematics(&state.q, &state.qd);
        let forces = self.contact_forces(&kin, &state.qd, &state.anchors);
        for i in 0..NUM_CONTACT_POINTS {
            let x = kin.contact[i].pos[0];
            if !self.contact_enabled || forces[i].depth <= T::zero() {
                state.anchors[i] = None;
                continue;
            }
            match state.anchors[i] {
                None => state.anchors[i] = Some(x),
                Some(a) => {
                    let limit = self.friction * forces[i].normal / self.tangential_stiffness;
                    let stretch = x - a;
                    if stretch.abs() > limit {
                        state.anchors[i] = Some(x - stretch.signum() * limit);
                    }
                }
            }
        }
    }

    pub fn contact_state(&self, state: &SimState<T>) -> ContactState<T> {
        let kin = self.kinematics(&state.q, &state.qd);
        let f = self.contact_forces(&kin, &state.qd, &state.anchors);
        let foot_force = [f[0].normal + f[1].normal, f[2].normal + f[3].normal];
        ContactState {
            foot_force,
            in_contact: foot_force.map(|v| v > self.contact_threshold),
        }
    }

    /// Kinetic (including rotor armature) plus gravitational potential energy.
    pub fn mechanical_energy(&self, state: &SimState<T>) -> T {
        let kin = self.kinematics(&state.q, &state.qd);
        let (m, _) = self.equations_of_motion(
            state,
            &state.q,
            &state.qd,
            &[T::zero(); NUM_ACTUATED],
            &ExternalDisturbance::none(),
        );
        let mut kinetic = T::zero();
        for r in 0..NUM_DOF {
            for c in 0..NUM_DOF {
                kinetic = kinetic + state.qd[r] * m[r][c] * state.qd[c];
            }
        }
        let potential = self
            .bodies
            .iter()
            .zip(kin.com.iter())
            .fold(T::zero(), |acc, (b, p)| acc + b.mass * self.gravity * p.pos[1]);
        T::lit(0.5) * kinetic + potential
    }

    /// Lowest contact-point clearance above the terrain (negative when penetrating).
    pub fn min_clearance(&self, state: &SimState<T>) -> T {
        let kin = self.kinematics(&state.q, &state.qd);
        kin.contact
            .iter()
            .map(|p| p.pos[1] - self.terrain_height(p.pos[0]))
            .fold(T::infinity(), T::min)
    }

    /// Base height above the terrain directly below the hip point.
    pub fn base_height(&self, state: &SimState<T>) -> T {
        state.q[1] - self.terrain_height(state.q[0])
    }

    /// State standing upright at `x` with joints at `pose`, at rest, with the
    /// lowest contact point exactly on the terrain.
    pub fn standing_state(&self, x: T, pose: &[T; NUM_ACTUATED]) -> SimState<T> {
        let mut s = SimState::zeroed();
        s.q[0] = x;
        s.q[JOINT_OFFSET..].copy_from_slice(pose);
        let lift = -self.min_clearance(&s);
        s.q[1] = lift;
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointForce<T> {
    pub normal: T,
    pub tangential: T,
    /// Penetration depth below the terrain (negative when clear).
    pub depth: T,
}

/// World position, Jacobian and velocity-product acceleration of a body point.
#[derive(Debug, Clone)]
pub struct Point<T> {
    pub pos: [T; 2],
    /// `jac[c] = ∂pos/∂q_c`
    pub jac: [[T; 2]; NUM_DOF],
    pub acc_vp: [T; 2],
}

impl<T: Real> Point<T> {
    fn origin(x: T, z: T) -> Self {
        let mut jac = [[T::zero(); 2]; NUM_DOF];
        jac[0] = [T::one(), T::zero()];
        jac[1] = [T::zero(), T::one()];
        Self {
            pos: [x, z],
            jac,
            acc_vp: [T::zero(); 2],
        }
    }

    /// Appends a lever arm given in the frame of `body` (x forward, z up).
    fn extend(&self, body: usize, angle: T, omega: T, local: [T; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        let w = [local[0] * c + local[1] * s, -local[0] * s + local[1] * c];
        let mut out = self.clone();
        out.pos = [self.pos[0] + w[0], self.pos[1] + w[1]];
        for &k in CHAINS[body] {
            out.jac[k] = [out.jac[k][0] + w[1], out.jac[k][1] - w[0]];
        }
        let w2 = omega * omega;
        out.acc_vp = [self.acc_vp[0] - w2 * w[0], self.acc_vp[1] - w2 * w[1]];
        out
    }

    pub fn velocity(&self, qd: &[T; NUM_DOF]) -> [T; 2] {
        let mut v = [T::zero(); 2];
        for c in 0..NUM_DOF {
            v[0] = v[0] + self.jac[c][0] * qd[c];
            v[1] = v[1] + self.jac[c][1] * qd[c];
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct Kinematics<T> {
    pub angle: [T; NUM_BODIES],
    pub omega: [T; NUM_BODIES],
    pub com: [Point<T>; NUM_BODIES],
    /// Left heel, left toe, right heel, right toe.
    pub contact: [Point<T>; NUM_CONTACT_POINTS],
}

/// Cholesky solve of the trailing block `m[start.., start..] x = rhs[start..]`.
/// Entries of `out` before `start` are left at zero.
fn solve_spd<T: Real>(
    m: &[[T; NUM_DOF]; NUM_DOF],
    rhs: &[T; NUM_DOF],
    start: usize,
    out: &mut [T; NUM_DOF],
) -> Option<()> {
    let n = NUM_DOF;
    let mut l = [[T::zero(); NUM_DOF]; NUM_DOF];
    for i in start..n {
        for j in start..=i {
            let mut sum = m[i][j];
            for k in start..j {
                sum = sum - l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > T::zero()) || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = [T::zero(); NUM_DOF];
    for i in start..n {
        let mut sum = rhs[i];
        for k in start..i {
            sum = sum - l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    for i in (start..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum = sum - l[k][i] * out[k];
        }
        out[i] = sum / l[i][i];
    }
    out.iter().all(|v| v.is_finite()).then_some(())
}
