use std::path::{Path, PathBuf};
use std::sync::Arc;

use bipedlab::model::BackendKind;
use bipedlab::ppo::Trainer;
use bipedlab::sim2sim::{PlotStatus, TrajectoryRecord};
use bipedlab::terrain::TerrainKind;
use bipedlab_cli::{eval, plot, train, validate, Cli, Common, RunConfig};
use clap::Parser;

fn common(out: &Path) -> Common {
    Common {
        seed: Some(5),
        envs: Some(8),
        iterations: Some(2),
        workers: Some(1),
        out: Some(out.to_path_buf()),
        ..Common::default()
    }
}

fn random_checkpoint(dir: &Path) -> PathBuf {
    let r = RunConfig::load(None).unwrap();
    let mut cfg = r.config.ppo.clone();
    cfg.num_envs = 1;
    let t = Trainer::new(cfg, Arc::new(r.env_settings()), BackendKind::Fast, 11).unwrap();
    let path = dir.join("random.bin");
    t.checkpoint().save(&path).unwrap();
    path
}

#[test]
fn train_writes_a_self_describing_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    std::fs::write(&config, "[train]\ncheckpoint_interval = 1\n").unwrap();
    let mut c = common(&tmp.path().join("runs"));
    c.config = Some(config);
    let r = c.resolve().unwrap();
    let mut log = Vec::new();
    let rep = train(&r, &mut log).unwrap();
    for f in ["config.toml", "robot.toml", "metrics.csv", "checkpoint_00001.bin", "checkpoint_00002.bin", "policy.bin"] {
        assert!(rep.run_dir.join(f).is_file(), "missing {f}");
    }
    let name = rep.run_dir.file_name().unwrap().to_string_lossy().into_owned();
    assert!(name.ends_with("-seed5"), "{name}");
    assert_eq!(rep.metrics.len(), 2);

    // The written config alone reproduces the run.
    let again = Common {
        config: Some(rep.run_dir.join("config.toml")),
        out: Some(tmp.path().join("again")),
        ..Common::default()
    };
    let rep2 = train(&again.resolve().unwrap(), &mut Vec::new()).unwrap();
    for f in ["metrics.csv", "policy.bin", "checkpoint_00002.bin"] {
        assert_eq!(std::fs::read(rep.run_dir.join(f)).unwrap(), std::fs::read(rep2.run_dir.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn runs_started_together_get_distinct_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = common(tmp.path());
    c.iterations = Some(0);
    let r = c.resolve().unwrap();
    let a = train(&r, &mut Vec::new()).unwrap();
    let b = train(&r, &mut Vec::new()).unwrap();
    assert_ne!(a.run_dir, b.run_dir);
}

#[test]
fn eval_zero_episodes_is_an_empty_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let ckpt = random_checkpoint(tmp.path());
    let s = eval(&common(tmp.path()).resolve().unwrap(), &ckpt, 0).unwrap();
    assert_eq!(s.episodes, 0);
    assert_eq!(s.to_string().lines().count(), 1);
}

#[test]
fn eval_is_deterministic_and_random_weights_fall() {
    let tmp = tempfile::tempdir().unwrap();
    let ckpt = random_checkpoint(tmp.path());
    let r = common(tmp.path()).resolve().unwrap();
    let a = eval(&r, &ckpt, 20).unwrap();
    let b = eval(&r, &ckpt, 20).unwrap();
    assert_eq!(a.to_string(), b.to_string());
    assert!(a.fall_rate >= 0.9, "fall rate {}", a.fall_rate);
}

#[test]
fn missing_checkpoint_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let r = common(tmp.path()).resolve().unwrap();
    let missing = tmp.path().join("nope.bin");
    assert!(eval(&r, &missing, 1).is_err());
    assert!(validate(&r, &missing, &[BackendKind::Fast], &[TerrainKind::Flat], tmp.path()).is_err());
    let cli = Cli::try_parse_from(["bipedlab", "eval", "--checkpoint", missing.to_str().unwrap()]).unwrap();
    assert!(bipedlab_cli::run(cli, &mut Vec::new()).is_err());
}

#[test]
fn validate_two_backends_two_terrains() {
    let tmp = tempfile::tempdir().unwrap();
    let ckpt = random_checkpoint(tmp.path());
    let r = common(tmp.path()).resolve().unwrap();
    let out = tmp.path().join("val");
    let rep = validate(&r, &ckpt, &[BackendKind::Fast, BackendKind::Reference], &[TerrainKind::Flat, TerrainKind::Uneven], &out).unwrap();
    let csvs: Vec<_> = rep.files.iter().filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("record_")).collect();
    assert_eq!(csvs.len(), 4);
    assert_eq!(rep.reports.len(), 2);
    for t in ["flat", "uneven"] {
        assert!(out.join(t).join("divergence.csv").is_file());
    }
    for (_, _, d) in &rep.reports {
        assert!(d.rms_position.iter().all(|v| v.is_finite()));
    }
    assert_eq!(rep.to_string().lines().next().unwrap().split_whitespace().next(), Some("terrain"));
}

#[test]
fn self_validation_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let ckpt = random_checkpoint(tmp.path());
    let r = common(tmp.path()).resolve().unwrap();
    let rep = validate(&r, &ckpt, &[BackendKind::Reference, BackendKind::Reference], &[TerrainKind::Flat], tmp.path()).unwrap();
    assert_eq!(rep.reports.len(), 1);
    assert!(rep.reports[0].2.is_zero());
}

#[test]
fn plot_one_record_one_joint() {
    let tmp = tempfile::tempdir().unwrap();
    let ckpt = random_checkpoint(tmp.path());
    let r = common(tmp.path()).resolve().unwrap();
    let val = tmp.path().join("val");
    validate(&r, &ckpt, &[BackendKind::Fast], &[TerrainKind::Flat], &val).unwrap();
    let src = val.join("flat").join("record_fast.csv");
    let out = tmp.path().join("plots");
    let status = plot(std::slice::from_ref(&src), &["left_knee".to_string()], &out, &mut Vec::new()).unwrap();
    let PlotStatus::Written(files) = status else { panic!("nothing written") };
    assert_eq!(files.len(), 2);
    let back = TrajectoryRecord::read_csv(out.join("record_fast.csv")).unwrap();
    assert_eq!(back, TrajectoryRecord::read_csv(&src).unwrap());
}

#[test]
fn config_errors_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, "[ppo]\nhorizn = 3\n").unwrap();
    let c = Common { config: Some(path), ..Common::default() };
    let err = format!("{:#}", c.resolve().unwrap_err());
    assert!(err.contains("horizn"), "{err}");
}

#[test]
fn out_root_comes_from_the_environment() {
    std::env::set_var(bipedlab_cli::OUT_ENV, "/from/env");
    let cli = Cli::try_parse_from(["bipedlab", "train"]).unwrap();
    let explicit = Cli::try_parse_from(["bipedlab", "train", "--out", "/flag"]).unwrap();
    std::env::remove_var(bipedlab_cli::OUT_ENV);
    let out = |c: Cli| match c.command {
        bipedlab_cli::Command::Train { common } => common.out,
        _ => unreachable!(),
    };
    assert_eq!(out(cli), Some(PathBuf::from("/from/env")));
    assert_eq!(out(explicit), Some(PathBuf::from("/flag")));
}

#[test]
fn default_config_smoke_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let cli = Cli::try_parse_from(["bipedlab", "train", "--config", "default", "--iterations", "5", "--envs", "8", "--out", out]).unwrap();
    let mut log = Vec::new();
    bipedlab_cli::run(cli, &mut log).unwrap();
    let runs: Vec<_> = std::fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(runs.len(), 1);
    let bins = std::fs::read_dir(&runs[0]).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "bin")).count();
    assert!(bins >= 1);
    assert_eq!(String::from_utf8(log).unwrap().lines().filter(|l| l.starts_with("iter")).count(), 5);
}
