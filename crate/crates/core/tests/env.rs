use std::sync::Arc;

use bipedlab::env::frames::{layout_listing, JOINT_SLOTS};
use bipedlab::env::{Env, EnvSettings, PushEvent, ACTION_DIM, OBS_DIM, OBS_FRAME_LEN, PRIV_DIM};
use bipedlab::model::BackendKind;

fn quiet_settings() -> EnvSettings {
    let mut s = EnvSettings::default();
    s.env.randomization.dynamics = false;
    s.env.randomization.observation_noise = false;
    s.env.push.enabled = false;
    s.env.reset_joint_jitter = 0.0;
    s.env.command.fixed_vx = Some(0.0);
    s
}

#[test]
fn frame_layout_matches_golden() {
    let golden = include_str!("golden/frame_layout.txt");
    assert_eq!(layout_listing(), golden);
}

#[test]
fn zero_action_holds_standing_pose_for_one_second() {
    let settings = Arc::new(quiet_settings());
    let mut env = Env::new(settings, BackendKind::Reference, 1, 0).unwrap();
    let pose = env.simulator().model.standing_pose;
    for _ in 0..100 {
        let out = env.step(&[0.0; ACTION_DIM]).unwrap();
        assert!(!out.done);
    }
    let theta = env.simulator().state.joint_state().theta;
    let err = theta
        .iter()
        .zip(pose.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 0.05, "max joint deviation {err}");
}

#[test]
fn timeout_at_episode_length() {
    let mut s = quiet_settings();
    s.physics.fixed_base = true;
    let mut env = Env::new(Arc::new(s), BackendKind::Fast, 2, 0).unwrap();
    for i in 1..=2400 {
        let out = env.step(&[0.0; ACTION_DIM]).unwrap();
        assert_eq!(out.episode_length, i);
        if i < 2400 {
            assert!(!out.done, "ended early at step {i}");
        } else {
            assert!(out.done && out.timeout && !out.fell);
        }
    }
}

#[test]
fn low_base_terminates() {
    let mut s = quiet_settings();
    s.env.min_base_height = 0.9;
    let mut env = Env::new(Arc::new(s), BackendKind::Fast, 3, 0).unwrap();
    let out = env.step(&[0.0; ACTION_DIM]).unwrap();
    assert!(out.done && out.fell && !out.timeout);
}

#[test]
fn divergence_is_flagged_not_raised() {
    let mut env = Env::new(Arc::new(quiet_settings()), BackendKind::Fast, 4, 0).unwrap();
    env.set_pushes(vec![PushEvent {
        start: 0.0,
        duration: 1.0,
        force: [f64::INFINITY, 0.0],
        torque: [0.0; 3],
    }]);
    let out = env.step(&[0.0; ACTION_DIM]).unwrap();
    assert!(out.done && out.diverged);
}

#[test]
fn malformed_actions_are_rejected() {
    let mut env = Env::new(Arc::new(quiet_settings()), BackendKind::Fast, 5, 0).unwrap();
    assert!(env.step(&[0.0; 6]).is_err());
    let mut a = [0.0; ACTION_DIM];
    a[3] = f64::NAN;
    assert!(env.step(&a).is_err());
}

#[test]
fn stacked_dimensions() {
    let env = Env::new(Arc::new(EnvSettings::default()), BackendKind::Fast, 6, 0).unwrap();
    assert_eq!(env.observation().len(), OBS_DIM);
    assert_eq!(env.privileged().len(), PRIV_DIM);
}

#[test]
fn observation_differs_from_privileged_only_by_noise() {
    let mut s = EnvSettings::default();
    s.env.push.enabled = false;
    let mut env = Env::new(Arc::new(s), BackendKind::Fast, 7, 0).unwrap();
    env.step(&[0.1; ACTION_DIM]).unwrap();
    let obs = env.latest_observation_frame();
    let prv = env.latest_privileged_frame();
    // clock, command and last action are exact; joints, ang vel and euler carry bounded noise
    assert_eq!(obs[..5], prv[..5]);
    assert_eq!(obs[35..47], prv[35..47]);
    let bounds = [(5, 17, 0.05), (17, 29, 0.5), (29, 32, 0.1), (32, 35, 0.03)];
    let mut any_noise = false;
    for (lo, hi, b) in bounds {
        for i in lo..hi {
            let d = (obs[i] - prv[i]).abs();
            assert!(d <= b + 1e-12, "index {i} noise {d}");
            any_noise |= d > 0.0;
        }
    }
    assert!(any_noise);
}

#[test]
fn action_clip_and_slot_mapping() {
    let mut s = quiet_settings();
    s.physics.fixed_base = true;
    let mut env = Env::new(Arc::new(s), BackendKind::Fast, 8, 0).unwrap();
    let mut a = [0.0; ACTION_DIM];
    a[JOINT_SLOTS[1]] = 100.0;
    a[0] = 50.0; // unused slot
    env.step(&a).unwrap();
    let last = &env.latest_observation_frame()[35..47];
    assert_eq!(last[JOINT_SLOTS[1]], 4.0);
    assert_eq!(last[0], 4.0);
}

#[test]
fn push_values_reach_privileged_frame() {
    let mut env = Env::new(Arc::new(quiet_settings()), BackendKind::Fast, 9, 0).unwrap();
    let idx = OBS_FRAME_LEN + 5;
    assert_eq!(env.latest_privileged_frame()[idx..idx + 2], [0.0, 0.0]);
    env.set_pushes(vec![PushEvent {
        start: 0.0,
        duration: 0.2,
        force: [30.0, 0.0],
        torque: [0.0; 3],
    }]);
    env.step(&[0.0; ACTION_DIM]).unwrap();
    assert_eq!(env.latest_privileged_frame()[idx..idx + 2], [30.0, 0.0]);
}

#[test]
fn same_seed_same_trajectory() {
    let settings = Arc::new(EnvSettings::default());
    let run = |index| {
        let mut env = Env::new(settings.clone(), BackendKind::Fast, 11, index).unwrap();
        let mut out = Vec::new();
        for k in 0..50 {
            let a = [((k as f64) * 0.1).sin(); ACTION_DIM];
            out.push(env.step(&a).unwrap().rewards.total);
        }
        (out, env.observation().to_vec())
    };
    assert_eq!(run(0), run(0));
    assert_ne!(run(0), run(1));
}
