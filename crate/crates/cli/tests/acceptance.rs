//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.
//!
//! Criterion 7 trains for 300 iterations with 256 environments and dominates
//! the runtime (about ten minutes on one core).

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use bipedlab::env::frames::layout_listing;
use bipedlab::env::{
    Env, EnvSettings, ObservationNoise, RandomizationConfig, RandomizationDraw, ACTION_DIM, OBS_DIM, OBS_FRAME_LEN,
    PRIV_DIM, PRIV_FRAME_LEN,
};
use bipedlab::gait::{clock_signal, gait_phase, stance_mask, GaitConfig};
use bipedlab::model::{BackendKind, ContactState, PHYSICS_DT};
use bipedlab::ppo::{
    clipped_objective, gae_advantages, Activation, Checkpoint, GaussianPolicy, IterationMetrics, Mlp, ObservationBatch,
    PrivilegedBatch, ValueFunction,
};
use bipedlab::rewards::{compute_rewards, phi, RewardInputs, RewardWeights};
use bipedlab::sim2sim::{
    compare_trajectories, fit_ellipse, phase_portrait, rollout_policy, RolloutConfig, Sample, TrajectoryRecord,
};
use bipedlab::terrain::TerrainKind;
use bipedlab_cli::{train, validate, Common};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Collects failed sub-checks of one criterion.
#[derive(Default)]
struct Checks(Vec<String>);

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.0.push(what());
        }
    }

    fn finish(self, ok_detail: impl Into<String>) -> Outcome {
        if self.0.is_empty() {
            Outcome::new(true, ok_detail)
        } else {
            Outcome::new(false, self.0.join("; "))
        }
    }
}

fn within_budget(mut o: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    if elapsed > budget {
        o.pass = false;
        o.detail = format!("{}; took {:.1?}, budget {:.0?}", o.detail, elapsed, budget);
    } else {
        o.detail = format!("{} ({:.2?})", o.detail, elapsed);
    }
    o
}

fn f32_row(v: &[f64]) -> Array2<f32> {
    Array2::from_shape_fn((1, v.len()), |(_, j)| v[j] as f32)
}

fn quiet_settings() -> EnvSettings {
    let mut s = EnvSettings::default();
    s.env.randomization.dynamics = false;
    s.env.randomization.observation_noise = false;
    s.env.push.enabled = false;
    s.env.reset_joint_jitter = 0.0;
    s.env.command.fixed_vx = Some(0.5);
    s
}

fn observation_dimensions() -> Outcome {
    let mut c = Checks::default();
    c.check(OBS_FRAME_LEN == 47, || format!("observation frame {OBS_FRAME_LEN} != 47"));
    c.check(PRIV_FRAME_LEN == 73, || format!("privileged frame {PRIV_FRAME_LEN} != 73"));
    c.check(OBS_DIM == 705 && OBS_DIM == 15 * OBS_FRAME_LEN, || format!("observation stack {OBS_DIM} != 705"));
    c.check(PRIV_DIM == 219 && PRIV_DIM == 3 * PRIV_FRAME_LEN, || format!("privileged stack {PRIV_DIM} != 219"));
    let golden = include_str!("../../core/tests/golden/frame_layout.txt");
    c.check(layout_listing() == golden, || "frame layout differs from golden file".into());
    let env = Env::new(Arc::new(EnvSettings::default()), BackendKind::Fast, 1, 0).expect("env");
    c.check(env.observation().len() == 705, || format!("env observation length {}", env.observation().len()));
    c.check(env.privileged().len() == 219, || format!("env privileged length {}", env.privileged().len()));
    c.check(env.latest_observation_frame().len() == 47, || "latest observation frame length".into());
    c.check(env.latest_privileged_frame().len() == 73, || "latest privileged frame length".into());
    c.finish("47/73 per frame, 705/219 stacked, layout matches golden")
}

fn reward_arithmetic() -> Outcome {
    let mut c = Checks::default();
    let w = RewardWeights::default();
    let positive: f64 = w.as_array().iter().filter(|v| **v > 0.0).sum();
    c.check((positive - 6.9).abs() < 1e-12, || format!("positive scales sum to {positive}"));

    let z = [0.0; 6];
    let a = [0.2; ACTION_DIM];
    let mut inp = RewardInputs {
        base_lin_vel: [0.5, 0.0, 0.0],
        base_ang_vel: [0.0; 3],
        euler: [0.0; 3],
        base_height: w.base_height_target,
        command: [0.5, 0.0, 0.0],
        theta: &z,
        theta_dot: &z,
        theta_ref: &z,
        theta_default: &z,
        torques: &z,
        stance_mask: [false, true],
        contact: ContactState { foot_force: [0.0, 300.0], in_contact: [false, true] },
        action: &a,
        last_action: &a,
        last_last_action: &a,
    };
    let r = compute_rewards(&inp, &w).expect("rewards");
    c.check((r.total - 6.9).abs() < 1e-12, || format!("perfect tracking total {}", r.total));

    inp.stance_mask = [true, true];
    inp.contact = ContactState { foot_force: [600.0, 600.0], in_contact: [true, true] };
    let r = compute_rewards(&inp, &w).expect("rewards");
    let large = r.get("large_contact").expect("term");
    c.check((large + 2.0).abs() < 1e-12, || format!("large contact term {large}"));

    for wt in [0.0, 0.5, 2.0, 5.0, 100.0] {
        let p = phi(&[0.0, 0.0, 0.0], wt).expect("phi");
        c.check(p == 1.0, || format!("phi(0, {wt}) = {p}"));
    }
    for wt in [0.5, 2.0, 5.0, 100.0] {
        let mut prev = 1.0;
        for k in 1..200 {
            let e = k as f64 * 0.005;
            let p = phi(&[e, -0.5 * e], wt).expect("phi");
            c.check(p < prev || (p == 0.0 && prev == 0.0), || format!("phi not decreasing at e={e}, w={wt}"));
            prev = p;
        }
    }
    c.finish("total 6.9, large contact -2.0, phi identities hold")
}

fn gait_invariants() -> Outcome {
    let mut c = Checks::default();
    let cfg = GaitConfig::default();
    let ct = cfg.cycle_time;
    let pose = [-0.05, 0.1, -0.05, -0.05, 0.1, -0.05];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0usize;
    for k in 0..10_000 {
        // even sweep over three cycles plus a random offset away from the window edges
        let t = k as f64 * 3.0 * ct / 10_000.0 + rng.random_range(1e-9..1e-6);
        let m = stance_mask(t, &cfg);
        let periodic = m == stance_mask(t + ct, &cfg) && m == stance_mask(t + 7.0 * ct, &cfg);
        let (s, co) = clock_signal(t, ct).expect("clock");
        let unit = (s * s + co * co - 1.0).abs() <= 1e-12;
        let g = gait_phase(t, &cfg, &pose).expect("phase");
        let left_still = g.theta_ref[..3] == pose[..3];
        let right_still = g.theta_ref[3..] == pose[3..];
        // swinging legs carry the reference bump and are exactly the ones the mask lifts
        let synced = match m {
            [true, true] => left_still && right_still,
            [false, true] => right_still && !left_still,
            [true, false] => left_still && !right_still,
            [false, false] => false,
        };
        if !(periodic && unit && synced && g.stance_mask == m) {
            failures += 1;
        }
    }
    c.check(failures == 0, || format!("{failures} of 10000 phases violate an invariant"));
    let left_swing_mid = ((cfg.ds_fraction + 0.5) / 2.0) * ct;
    c.check(stance_mask(left_swing_mid, &cfg) == [false, true], || "left swing mask is not [0,1]".into());
    c.finish("periodic, never [0,0], swing matches mask, clock on unit circle over 10^4 phases")
}

/// λ-return as the weighted mixture of n-step returns, truncated at episode ends.
fn lambda_return_oracle(rewards: &[f64], values: &[f64], dones: &[bool], gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let nstep = |t: usize, k: usize| -> f64 {
        let mut g = 0.0;
        let mut disc = 1.0;
        for i in t..t + k {
            g += disc * rewards[i];
            disc *= gamma;
            if dones[i] {
                return g;
            }
        }
        g + disc * values[t + k]
    };
    (0..n)
        .map(|t| {
            let horizon = n - t;
            let mut g = 0.0;
            for k in 1..horizon {
                g += (1.0 - lambda) * lambda.powi(k as i32 - 1) * nstep(t, k);
            }
            g += lambda.powi(horizon as i32 - 1) * nstep(t, horizon);
            g - values[t]
        })
        .collect()
}

fn mlp_gradient_check(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for net in 0..20 {
        let depth = rng.random_range(1..4);
        let mut dims = vec![rng.random_range(1..6)];
        for _ in 0..depth {
            dims.push(rng.random_range(1..7));
        }
        let mlp = Mlp::<f64>::new(&dims, Activation::Elu, 1.0, rng).map_err(|e| e.to_string())?;
        let batch = rng.random_range(1..4);
        let x = Array2::from_shape_fn((batch, dims[0]), |_| rng.random_range(-2.0..2.0));
        let wout = Array2::from_shape_fn((batch, *dims.last().unwrap()), |_| rng.random_range(-1.0..1.0));
        let loss = |m: &Mlp<f64>| (m.forward(x.view()).unwrap() * &wout).sum();
        let (_, tape) = mlp.forward_train(x.view()).map_err(|e| e.to_string())?;
        let mut grads = vec![0.0; mlp.params().len()];
        mlp.backward(&tape, wout.view(), &mut grads).map_err(|e| e.to_string())?;
        let h = 1e-5;
        for (i, g) in grads.iter().enumerate() {
            let mut p = mlp.clone();
            p.params_mut()[i] += h;
            let up = loss(&p);
            p.params_mut()[i] -= 2.0 * h;
            let down = loss(&p);
            let numeric = (up - down) / (2.0 * h);
            let scale = g.abs().max(numeric.abs()).max(1e-6);
            if (g - numeric).abs() > 1e-4 * scale {
                return Err(format!("net {net} {dims:?} param {i}: analytic {g} numeric {numeric}"));
            }
        }
    }
    Ok(())
}

fn ppo_correctness() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let rewards: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let values: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let dones: Vec<bool> = (0..5).map(|_| rng.random_bool(0.25)).collect();
        for (gamma, lambda) in [(0.994, 0.95), (0.9, 0.0), (0.99, 1.0), (0.5, 0.7)] {
            let (adv, _) = gae_advantages(&rewards, &values, &dones, gamma, lambda).expect("gae");
            let oracle = lambda_return_oracle(&rewards, &values, &dones, gamma, lambda);
            for (a, o) in adv.iter().zip(&oracle) {
                worst = worst.max((a - o).abs());
            }
            if lambda == 0.0 {
                for t in 0..5 {
                    let live = if dones[t] { 0.0 } else { 1.0 };
                    let delta = rewards[t] + gamma * live * values[t + 1] - values[t];
                    c.check((adv[t] - delta).abs() < 1e-10, || format!("lambda=0 step {t}: {} vs {delta}", adv[t]));
                }
            }
            if lambda == 1.0 {
                let mut g = values[5];
                for t in (0..5).rev() {
                    g = rewards[t] + if dones[t] { 0.0 } else { gamma * g };
                    c.check((adv[t] - (g - values[t])).abs() < 1e-10, || format!("lambda=1 step {t}"));
                }
            }
        }
    }
    c.check(worst < 1e-10, || format!("gae vs oracle max error {worst:e}"));

    let hand = [
        (1.5f64, 1.0, 1.2, 0.0),
        (1.1, 1.0, 1.1, 1.0),
        (0.5, 1.0, 0.5, 1.0),
        (0.5, -1.0, -0.8, 0.0),
        (1.5, -1.0, -1.5, -1.0),
        (0.9, -2.0, -1.8, -2.0),
    ];
    for (r, a, obj, slope) in hand {
        let (o, s) = clipped_objective(r, a, 0.8, 1.2);
        c.check((o - obj).abs() < 1e-12 && (s - slope).abs() < 1e-12, || format!("clip({r}, {a}) = ({o}, {s})"));
    }
    if let Err(e) = mlp_gradient_check(&mut rng) {
        c.check(false, || e);
    }
    c.finish(format!("gae oracle error {worst:.1e}, limits and clip values exact, 20 nets within 1e-4"))
}

fn asymmetry() -> Outcome {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let policy = GaussianPolicy::<f32>::new(OBS_DIM, &[512, 256, 128], ACTION_DIM, 0.8, &mut rng).expect("policy");
    let value = ValueFunction::<f32>::new(PRIV_DIM, &[512, 256, 128], &mut rng).expect("value");

    let base = quiet_settings();
    let mut shifted = base.clone();
    shifted.physics.friction = 0.3;
    let a = Env::new(Arc::new(base.clone()), BackendKind::Fast, 9, 0).expect("env");
    let b = Env::new(Arc::new(shifted), BackendKind::Fast, 9, 0).expect("env");
    c.check(a.privileged() != b.privileged(), || "privileged state did not change".into());
    let act_a = policy.act_mean(ObservationBatch(f32_row(a.observation()).view())).expect("act");
    let act_b = policy.act_mean(ObservationBatch(f32_row(b.observation()).view())).expect("act");
    let same = act_a.iter().zip(act_b.iter()).all(|(x, y)| x.to_bits() == y.to_bits());
    c.check(same, || "actions changed with privileged state".into());

    let mut noisy = base.clone();
    noisy.env.randomization.observation_noise = true;
    let clean = Env::new(Arc::new(base), BackendKind::Fast, 10, 0).expect("env");
    let noisy = Env::new(Arc::new(noisy), BackendKind::Fast, 10, 0).expect("env");
    c.check(clean.observation() != noisy.observation(), || "observation noise had no effect".into());
    let va = value.values(PrivilegedBatch(f32_row(clean.privileged()).view())).expect("value");
    let vb = value.values(PrivilegedBatch(f32_row(noisy.privileged()).view())).expect("value");
    c.check(va == vb, || format!("values differ: {va} vs {vb}"));
    c.finish("actions bitwise equal under privileged changes, values equal under observation noise")
}

fn randomization_ranges() -> Outcome {
    let mut c = Checks::default();
    let cfg = RandomizationConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    const N: usize = 100_000;
    let mut cols: [Vec<f64>; 4] = Default::default();
    for _ in 0..N {
        let d = RandomizationDraw::sample(&mut rng, &cfg);
        cols[0].push(d.friction);
        cols[1].push(d.motor_strength);
        cols[2].push(d.payload);
        cols[3].push(d.delay_ticks as f64 * PHYSICS_DT * 1e3);
    }
    let mut noise: [Vec<f64>; 4] = Default::default();
    for _ in 0..N {
        let n = ObservationNoise::<12>::sample(&mut rng, &cfg);
        noise[0].push(n.joint_pos[0]);
        noise[1].push(n.joint_vel[5]);
        noise[2].push(n.ang_vel[1]);
        noise[3].push(n.euler[1]);
    }
    let s = |v: f64| [-v, v];
    let checks = [
        ("friction", &cols[0], cfg.friction),
        ("motor_strength", &cols[1], cfg.motor_strength),
        ("payload", &cols[2], cfg.payload),
        ("delay_ms", &cols[3], cfg.delay_ms),
        ("joint_pos_noise", &noise[0], s(cfg.joint_pos_noise)),
        ("joint_vel_noise", &noise[1], s(cfg.joint_vel_noise)),
        ("ang_vel_noise", &noise[2], s(cfg.ang_vel_noise)),
        ("euler_noise", &noise[3], s(cfg.euler_noise)),
    ];
    let mut worst_z = 0.0f64;
    for (name, xs, range) in checks {
        let inside = xs.iter().all(|x| *x >= range[0] && *x <= range[1]);
        c.check(inside, || format!("{name} left [{}, {}]", range[0], range[1]));
        let mean = xs.iter().sum::<f64>() / N as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (N as f64 - 1.0);
        let se = (var / N as f64).sqrt();
        let z = (mean - 0.5 * (range[0] + range[1])).abs() / se;
        worst_z = worst_z.max(z);
        c.check(z <= 3.0, || format!("{name} mean {mean} is {z:.2} standard errors from center"));
    }
    c.finish(format!("8 parameters x 10^5 draws in range, worst mean offset {worst_z:.2} SE"))
}

/// Mean of the finite entries, with how many there were.
fn finite_mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let v: Vec<f64> = xs.filter(|x| x.is_finite()).collect();
    (v.iter().sum::<f64>() / v.len().max(1) as f64, v.len())
}

fn train_run(out: &Path, iterations: usize, workers: usize) -> anyhow::Result<bipedlab_cli::TrainReport> {
    let c = Common {
        seed: Some(1),
        envs: Some(256),
        iterations: Some(iterations),
        terrain: Some(bipedlab_cli::TerrainArg::Flat),
        workers: Some(workers),
        out: Some(out.to_path_buf()),
        ..Common::default()
    };
    let r = c.resolve()?;
    assert_eq!(r.config.ppo.horizon, 24);
    train(&r, &mut std::io::sink())
}

fn desk_scale_learning(out: &Path) -> (Outcome, Option<PathBuf>) {
    let rep = match train_run(out, 300, 0) {
        Ok(r) => r,
        Err(e) => return (Outcome::new(false, format!("training failed: {e:#}")), None),
    };
    let ckpt = rep.checkpoints.last().cloned();
    let m: &[IterationMetrics] = &rep.metrics;
    let early = &m[..10];
    let late = &m[289..];
    let (r0, n0) = finite_mean(early.iter().map(|x| x.mean_return));
    let (r1, n1) = finite_mean(late.iter().map(|x| x.mean_return));
    let (l0, _) = finite_mean(early.iter().map(|x| x.mean_episode_length));
    let (l1, _) = finite_mean(late.iter().map(|x| x.mean_episode_length));
    let mut c = Checks::default();
    c.check(n0 > 0 && n1 > 0, || "no completed episodes in a window".into());
    c.check(r1 >= 1.5 * r0, || format!("return {r0:.1} -> {r1:.1} ({:+.0}%, need +50%)", 100.0 * (r1 / r0 - 1.0)));
    c.check(l1 >= 2.0 * l0, || format!("episode length {l0:.1} -> {l1:.1} (x{:.2}, need x2)", l1 / l0));
    let detail = format!("return {r0:.1} -> {r1:.1}, length {l0:.1} -> {l1:.1}");
    let o = c.finish(detail.clone());
    let o = if o.pass { o } else { Outcome::new(false, format!("{}; {detail}", o.detail)) };
    (o, ckpt)
}

fn sine_record(amplitude: f64, freq: f64, seconds: f64) -> TrajectoryRecord {
    let mut rec = TrajectoryRecord::for_robot();
    let w = std::f64::consts::TAU * freq;
    for k in 0..(seconds * 100.0) as usize {
        let t = k as f64 * 0.01;
        let theta = vec![amplitude * (w * t).sin(); 6];
        let theta_dot = vec![amplitude * w * (w * t).cos(); 6];
        rec.samples.push(Sample { t, theta, theta_dot, base_pose: [0.0; 6], base_vel: [0.0; 3], contact_force: [0.0; 2] });
    }
    rec
}

fn sim_to_sim(checkpoint: Option<&Path>) -> Outcome {
    let mut c = Checks::default();
    let Some(path) = checkpoint else { return Outcome::new(false, "no checkpoint from criterion 7") };
    let ckpt = match Checkpoint::load(path) {
        Ok(ck) => ck,
        Err(e) => return Outcome::new(false, format!("loading checkpoint: {e}")),
    };
    let cfg = RolloutConfig { command_vx: 0.5, duration: 5.0, terrain: TerrainKind::Flat, observation_noise: false };
    let settings = EnvSettings::default();
    let mut records = Vec::new();
    let mut ends = Vec::new();
    for backend in [BackendKind::Fast, BackendKind::Reference] {
        match rollout_policy(backend, &ckpt, &settings, &cfg, 1) {
            Ok(o) => {
                c.check(!o.diverged, || format!("{} diverged", backend.name()));
                c.check(!o.record.is_empty() && o.record.validate().is_ok(), || format!("{} record invalid", backend.name()));
                let end = o.record.samples.last().map_or(0.0, |s| s.t + 0.01);
                ends.push(if o.fell { format!("{} fell at {end:.2} s", backend.name()) } else { format!("{} ran {end:.2} s", backend.name()) });
                records.push(o.record);
            }
            Err(e) => c.check(false, || format!("{} rollout failed: {e}", backend.name())),
        }
    }
    let mut rms = String::new();
    if let [fast, reference] = &records[..] {
        for r in [fast, reference] {
            match compare_trajectories(r, r) {
                Ok(d) => c.check(d.is_zero(), || "self-comparison not zero".into()),
                Err(e) => c.check(false, || format!("self-comparison failed: {e}")),
            }
        }
        match compare_trajectories(fast, reference) {
            Ok(d) => {
                c.check(d.rms_position.iter().all(|v| v.is_finite()), || "non-finite cross-backend RMS".into());
                rms = d
                    .joint_names
                    .iter()
                    .zip(&d.rms_position)
                    .map(|(n, v)| format!("{n}={v:.2e}"))
                    .collect::<Vec<_>>()
                    .join(" ");
            }
            Err(e) => c.check(false, || format!("cross-backend comparison failed: {e}")),
        }
    }
    let (amp, freq) = (0.3, 1.0);
    let rec = sine_record(amp, freq, 5.0);
    match phase_portrait(&rec, "left_knee", 0..500).and_then(|p| fit_ellipse(&p)) {
        Ok(e) => {
            let w = std::f64::consts::TAU * freq;
            let ea = (e.semi_axes.0 / amp - 1.0).abs();
            let eb = (e.semi_axes.1 / (amp * w) - 1.0).abs();
            c.check(ea < 0.01 && eb < 0.01, || format!("ellipse semi-axes off by {ea:.4}, {eb:.4}"));
        }
        Err(e) => c.check(false, || format!("portrait fit failed: {e}")),
    }
    c.finish(format!("no divergence ({}), self-comparison 0, cross-backend RMS [rad] {rms}", ends.join(", ")))
}

fn determinism(out: &Path) -> Outcome {
    let mut c = Checks::default();
    let runs: Vec<_> = [1usize, 3, 1].iter().map(|&w| train_run(&out.join(format!("w{w}")), 20, w)).collect();
    let dirs: Vec<PathBuf> = match runs.into_iter().collect::<anyhow::Result<Vec<_>>>() {
        Ok(r) => r.into_iter().map(|r| r.run_dir).collect(),
        Err(e) => return Outcome::new(false, format!("training failed: {e:#}")),
    };
    // the resolved configs differ only in worker count and output root
    let configs: Vec<Option<bipedlab_cli::RunConfig>> = dirs
        .iter()
        .map(|d| {
            let text = std::fs::read_to_string(d.join("config.toml")).ok()?;
            let mut cfg = bipedlab_cli::RunConfig::from_toml_str(&text).ok()?;
            cfg.ppo.workers = 0;
            cfg.out_dir = PathBuf::new();
            Some(cfg)
        })
        .collect();
    c.check(configs[0].is_some() && configs.iter().all(|x| *x == configs[0]), || "resolved configs differ".into());
    for f in ["metrics.csv", "policy.bin", "robot.toml"] {
        let a = std::fs::read(dirs[0].join(f)).unwrap_or_default();
        for d in &dirs[1..] {
            let b = std::fs::read(d.join(f)).unwrap_or_default();
            c.check(!a.is_empty() && a == b, || format!("{f} differs between {} and {}", dirs[0].display(), d.display()));
        }
    }
    // validate output from the trained checkpoint, twice
    let mut csvs = Vec::new();
    for k in 0..2 {
        let common = Common { seed: Some(1), out: Some(out.join(format!("val{k}"))), ..Common::default() };
        let dir = out.join(format!("val{k}"));
        let res = common.resolve().and_then(|r| {
            validate(&r, &dirs[0].join("policy.bin"), &[BackendKind::Fast, BackendKind::Reference], &[TerrainKind::Flat], &dir)
        });
        match res {
            Ok(rep) => {
                let mut files: Vec<PathBuf> = rep.files.into_iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
                files.sort();
                csvs.push(files);
            }
            Err(e) => c.check(false, || format!("validate failed: {e:#}")),
        }
    }
    if let [a, b] = &csvs[..] {
        c.check(a.len() == b.len() && !a.is_empty(), || "validate wrote different file sets".into());
        for (x, y) in a.iter().zip(b) {
            let same = std::fs::read(x).ok() == std::fs::read(y).ok();
            c.check(same, || format!("{} differs from {}", x.display(), y.display()));
        }
    }
    c.finish("20-iteration runs with 1 and 3 workers and validate CSVs are bitwise identical")
}

fn main() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut timed = |n: usize, budget: u64, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let o = within_budget(o, start.elapsed(), Duration::from_secs(budget));
        println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o));
    };
    timed(1, 1, &mut observation_dimensions);
    timed(2, 1, &mut reward_arithmetic);
    timed(3, 1, &mut gait_invariants);
    timed(4, 30, &mut ppo_correctness);
    timed(5, 5, &mut asymmetry);
    timed(6, 10, &mut randomization_ranges);
    let mut ckpt = None;
    timed(7, 30 * 60, &mut || {
        let (o, path) = desk_scale_learning(&tmp.path().join("learn"));
        ckpt = path;
        o
    });
    timed(8, 120, &mut || sim_to_sim(ckpt.as_deref()));
    timed(9, 5 * 60, &mut || determinism(&tmp.path().join("det")));

    let failed: Vec<usize> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
