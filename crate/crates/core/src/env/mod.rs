//! The partially observable locomotion environment.
//!
//! One [`Env`] owns a simulator, a seeded random stream and the frame stacks.
//! Each [`Env::step`] takes a twelve-dimensional action of joint-target
//! offsets, runs one 100 Hz control step, assembles the observation and
//! privileged frames, and scores the step with the reward suite.

pub mod command;
pub mod config;
pub mod frames;
pub mod log;
pub mod push;
pub mod randomization;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use command::{sample_command, Command};
pub use config::{CommandConfig, EnvConfig, PushConfig, RandomizationConfig};
pub use frames::{
    FrameStack, ACTION_DIM, OBS_DIM, OBS_FRAME_LEN, OBS_STACK_DEPTH, PRIV_DIM, PRIV_FRAME_LEN,
    PRIV_STACK_DEPTH,
};
pub use push::{active_disturbance, schedule_pushes, PushEvent};
pub use randomization::{ObservationNoise, RandomizationDraw};
pub use crate::terrain::{make_terrain, Terrain, TerrainKind};

use crate::error::{Error, Result};
use crate::gait::{gait_phase, GaitConfig};
use crate::model::{
    BackendKind, DelayLine, ExternalDisturbance, Model, PhysicsConfig, RobotDescription,
    Simulator, NUM_ACTUATED, POLICY_DT,
};
use crate::rewards::{compute_rewards, RewardInputs, RewardTerms, RewardWeights};
use frames::{observation_frame, privileged_frame, PrivilegedExtras, ProprioState, JOINT_SLOTS};

/// Everything needed to build environments; shared read-only between instances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvSettings {
    pub robot: RobotDescription,
    pub physics: PhysicsConfig,
    pub gait: GaitConfig,
    pub env: EnvConfig,
    pub rewards: RewardWeights,
}

impl EnvSettings {
    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        self.physics.validate()?;
        self.gait.validate()?;
        self.env.validate()?;
        self.rewards.validate()
    }
}

/// Mixes a global seed and an environment index into an independent stream seed.
pub fn stream_seed(global: u64, index: u64) -> u64 {
    let mut z = global ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub rewards: RewardTerms<f64>,
    pub done: bool,
    /// Base too low or torso pitched past the limit.
    pub fell: bool,
    /// Episode reached its step budget.
    pub timeout: bool,
    /// The simulator produced non-finite state; the step reward is zero.
    pub diverged: bool,
    /// Return accumulated over the episode including this step.
    pub episode_return: f64,
    pub episode_length: usize,
}

#[derive(Debug, Clone)]
pub struct Env {
    settings: Arc<EnvSettings>,
    sim: Simulator<f64>,
    rng: ChaCha8Rng,
    terrain_seed: u64,
    draw: RandomizationDraw,
    command: Command,
    pushes: Vec<PushEvent>,
    delay: DelayLine<f64>,
    obs: FrameStack,
    privileged: FrameStack,
    last_action: [f64; ACTION_DIM],
    last_last_action: [f64; ACTION_DIM],
    applied_push: ExternalDisturbance<f64>,
    last_torques: [f64; NUM_ACTUATED],
    steps: usize,
    episode_return: f64,
}

impl Env {
    /// Builds environment `index` of a run seeded with `seed` and resets it.
    pub fn new(settings: Arc<EnvSettings>, backend: BackendKind, seed: u64, index: u64) -> Result<Self> {
        settings.validate()?;
        let stream = stream_seed(seed, index);
        let rng = ChaCha8Rng::seed_from_u64(stream);
        let terrain = make_terrain(settings.env.terrain, stream);
        let model = Model::new(&settings.robot, &settings.physics, terrain)?;
        let state = model.standing_state(0.0, &model.standing_pose);
        let pose = model.standing_pose;
        let mut env = Self {
            sim: Simulator::new(model, backend, state),
            rng,
            terrain_seed: stream,
            draw: RandomizationDraw::nominal(settings.physics.friction),
            command: Command::forward(0.0),
            pushes: Vec::new(),
            delay: DelayLine::new(0, pose),
            obs: FrameStack::new(OBS_FRAME_LEN, OBS_STACK_DEPTH),
            privileged: FrameStack::new(PRIV_FRAME_LEN, PRIV_STACK_DEPTH),
            last_action: [0.0; ACTION_DIM],
            last_last_action: [0.0; ACTION_DIM],
            applied_push: ExternalDisturbance::none(),
            last_torques: [0.0; NUM_ACTUATED],
            steps: 0,
            episode_return: 0.0,
            settings,
        };
        env.reset_episode();
        Ok(env)
    }

    pub fn settings(&self) -> &EnvSettings {
        &self.settings
    }

    /// Starts a new episode from the environment's own random stream.
    pub fn reset_episode(&mut self) {
        let cfg = &self.settings.env;
        let rcfg = &cfg.randomization;
        self.draw = if rcfg.dynamics {
            RandomizationDraw::sample(&mut self.rng, rcfg)
        } else {
            RandomizationDraw::nominal(self.settings.physics.friction)
        };
        self.command = sample_command(&mut self.rng, &cfg.command);
        let horizon = cfg.episode_length as f64 * POLICY_DT;
        self.pushes = schedule_pushes(&mut self.rng, &cfg.push, horizon);

        let model = &mut self.sim.model;
        model.friction = self.draw.friction;
        model.set_payload(self.draw.payload);
        let mut pose = model.standing_pose;
        if cfg.reset_joint_jitter > 0.0 {
            for p in pose.iter_mut() {
                *p += self.rng.random_range(-cfg.reset_joint_jitter..=cfg.reset_joint_jitter);
            }
        }
        self.sim.state = model.standing_state(0.0, &pose);
        self.delay = DelayLine::new(self.draw.delay_ticks, model.standing_pose);
        self.last_action = [0.0; ACTION_DIM];
        self.last_last_action = [0.0; ACTION_DIM];
        self.applied_push = ExternalDisturbance::none();
        self.last_torques = [0.0; NUM_ACTUATED];
        self.steps = 0;
        self.episode_return = 0.0;

        let (obs, privileged) = self.assemble_frames();
        self.obs.fill(&obs);
        self.privileged.fill(&privileged);
    }

    /// Episode time, s.
    pub fn time(&self) -> f64 {
        self.steps as f64 * POLICY_DT
    }

    fn assemble_frames(&mut self) -> ([f64; OBS_FRAME_LEN], [f64; PRIV_FRAME_LEN]) {
        let t = self.time();
        let model = &self.sim.model;
        let state = &self.sim.state;
        let gait = gait_phase(t, &self.settings.gait, &model.standing_pose).expect("validated gait config");
        let js = state.joint_state();
        let pose = state.base_pose();
        let proprio = ProprioState {
            clock: gait.clock,
            command: self.command.to_array(),
            theta: js.theta,
            theta_dot: js.theta_dot,
            ang_vel: state.base_angular_velocity(),
            euler: pose.euler(),
            last_action: &self.last_action,
        };
        let mut tracking_diff = [0.0; NUM_ACTUATED];
        for i in 0..NUM_ACTUATED {
            tracking_diff[i] = js.theta[i] - gait.theta_ref[i];
        }
        let contact = model.contact_state(state);
        let extras = PrivilegedExtras {
            friction: self.draw.friction,
            body_mass_delta: model.payload(),
            lin_vel: state.base_linear_velocity(),
            push_force: self.applied_push.push_force,
            push_torque: self.applied_push.push_torque,
            tracking_diff,
            stance_mask: gait.stance_mask,
            contact: contact.in_contact,
        };
        let rcfg = &self.settings.env.randomization;
        let noise = rcfg
            .observation_noise
            .then(|| ObservationNoise::<NUM_ACTUATED>::sample(&mut self.rng, rcfg));
        (observation_frame(&proprio, noise.as_ref()), privileged_frame(&proprio, &extras))
    }

    /// Advances one policy step. The caller resets the episode after `done`.
    pub fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        if action.len() != ACTION_DIM {
            return Err(Error::contract(format!(
                "action has length {}, expected {ACTION_DIM}",
                action.len()
            )));
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::contract("action must be finite"));
        }
        let cfg = &self.settings.env;
        let mut clipped = [0.0; ACTION_DIM];
        for (c, a) in clipped.iter_mut().zip(action) {
            *c = a.clamp(-cfg.action_clip, cfg.action_clip);
        }
        let model = &self.sim.model;
        let mut target = model.standing_pose;
        for (i, slot) in JOINT_SLOTS.iter().enumerate() {
            target[i] += cfg.action_scale * clipped[*slot];
        }
        let disturbance = active_disturbance(&self.pushes, self.time());
        self.applied_push = disturbance;
        let result = self
            .sim
            .control_substep(&target, &disturbance, &mut self.delay, self.draw.motor_strength);
        self.steps += 1;
        let torques = match result {
            Ok(t) => t,
            Err(Error::Diverged { .. }) => {
                return Ok(StepOutcome {
                    rewards: RewardTerms::from_raw([0.0; crate::rewards::NUM_TERMS], &self.settings.rewards),
                    done: true,
                    fell: false,
                    timeout: false,
                    diverged: true,
                    episode_return: self.episode_return,
                    episode_length: self.steps,
                });
            }
            Err(e) => return Err(e),
        };
        self.last_torques = torques;

        let rewards = self.score(&clipped, &torques)?;
        self.last_last_action = self.last_action;
        self.last_action = clipped;
        let (obs, privileged) = self.assemble_frames();
        self.obs.push(&obs);
        self.privileged.push(&privileged);

        let cfg = &self.settings.env;
        let model = &self.sim.model;
        let height = model.base_height(&self.sim.state);
        let pitch = self.sim.state.base_pose().beta;
        let fell = height < cfg.min_base_height || pitch.abs() > cfg.max_pitch;
        let timeout = !fell && self.steps >= cfg.episode_length;
        self.episode_return += rewards.total;
        Ok(StepOutcome {
            rewards,
            done: fell || timeout,
            fell,
            timeout,
            diverged: false,
            episode_return: self.episode_return,
            episode_length: self.steps,
        })
    }

    fn score(&self, action: &[f64; ACTION_DIM], torques: &[f64; NUM_ACTUATED]) -> Result<RewardTerms<f64>> {
        let model = &self.sim.model;
        let state = &self.sim.state;
        let gait = gait_phase(self.time(), &self.settings.gait, &model.standing_pose)?;
        let js = state.joint_state();
        let pose = state.base_pose();
        let inputs = RewardInputs {
            base_lin_vel: state.base_linear_velocity(),
            base_ang_vel: state.base_angular_velocity(),
            euler: pose.euler(),
            base_height: model.base_height(state),
            command: self.command.to_array(),
            theta: &js.theta,
            theta_dot: &js.theta_dot,
            theta_ref: &gait.theta_ref,
            theta_default: &model.standing_pose,
            torques,
            stance_mask: gait.stance_mask,
            contact: model.contact_state(state),
            action,
            last_action: &self.last_action,
            last_last_action: &self.last_last_action,
        };
        compute_rewards(&inputs, &self.settings.rewards)
    }

    /// Stacked policy observation, length [`OBS_DIM`].
    pub fn observation(&self) -> &[f64] {
        self.obs.as_slice()
    }

    /// Stacked privileged state, length [`PRIV_DIM`].
    pub fn privileged(&self) -> &[f64] {
        self.privileged.as_slice()
    }

    pub fn latest_observation_frame(&self) -> &[f64] {
        self.obs.latest()
    }

    pub fn latest_privileged_frame(&self) -> &[f64] {
        self.privileged.latest()
    }

    pub fn simulator(&self) -> &Simulator<f64> {
        &self.sim
    }

    pub fn command(&self) -> Command {
        self.command
    }

    pub fn randomization(&self) -> RandomizationDraw {
        self.draw
    }

    pub fn pushes(&self) -> &[PushEvent] {
        &self.pushes
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn terrain_seed(&self) -> u64 {
        self.terrain_seed
    }

    pub fn last_torques(&self) -> [f64; NUM_ACTUATED] {
        self.last_torques
    }

    /// Replaces the push schedule of the current episode.
    pub fn set_pushes(&mut self, pushes: Vec<PushEvent>) {
        self.pushes = pushes;
    }
}
