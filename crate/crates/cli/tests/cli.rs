use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MINIMAL: &str = r#"
seed = 3
dt = 0.001
episode_length = 2.0

[plant]
kind = "arm"
damping = 4.5
q0 = [0.0, 0.0]

[sensors]
noise_std_pos = 0.001
noise_std_vel = 0.001

[goal]
kind = "constant"
mu_g = [0.5, -0.3]

[collision]
start = 0.5
duration = 0.5

[aic]
kappa_mu = 20.0
kappa_a = 10.0
u_saturation = 5.0
tau_inv = 0.5

[uaic]
kappa_mu = 500.0
kappa_u = 20000.0
kp = 10.0
ki = 5.0
kd = 2.0
integral_limit = 0.01
u_saturation = 5.0
sigma_u = 100.0

[[scenario]]
name = "AIC"
controller = "aic"

[[scenario]]
name = "u-AIC"
controller = "uaic"
"#;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn aicsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aicsim"))
        .args(args)
        .env_remove("AICSIM_OUT_DIR")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn simulate_writes_headed_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let out = dir.path().join("out");
    let o = aicsim(&["simulate", "--config", &cfg, "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = rows(&out.join("AIC_trajectory.csv"));
    assert_eq!(traj[0][0], "t [s]");
    assert_eq!(traj[0][1], "q_1 [rad]");
    assert_eq!(traj[0][14], "u_2 [N m]");
    assert_eq!(traj.len(), 2001);
    assert!(traj.iter().all(|r| r.len() == 15));
    let metrics = rows(&out.join("u-AIC_metrics.csv"));
    assert_eq!(metrics[0][..6], ["scenario", "controller", "e_ss [rad]", "t_s [s]", "os [%]", "RMSE [rad]"]);
    assert_eq!(metrics[1][..2], ["u-AIC", "uaic"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("u-AIC") && stdout.contains("RMSE"));
}

#[test]
fn negative_variance_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &MINIMAL.replace("sigma_u = 100.0", "sigma_u = -1.0"));
    let out = dir.path().join("out");
    let o = aicsim(&["simulate", "--config", &cfg, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma_u"));
}

#[test]
fn unknown_keys_and_parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &MINIMAL.replace("seed = 3", "seed = 3\nsede = 4"));
    let o = aicsim(&["simulate", "--config", &cfg, "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sede"));
    let o = aicsim(&["simulate", "--config", s(&dir.path().join("missing.toml"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(aicsim(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn single_trial_batch_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let (a, b) = (dir.path().join("sim"), dir.path().join("batch"));
    assert!(aicsim(&["simulate", "--config", &cfg, "--out", s(&a)]).status.success());
    assert!(aicsim(&["batch", "--config", &cfg, "--out", s(&b), "--trials", "1"]).status.success());
    let summary = rows(&b.join("summary.csv"));
    assert_eq!(summary[0], ["scenario", "e_ss [rad]", "t_s [s]", "os [%]", "RMSE [rad]"]);
    for (k, name) in ["AIC", "u-AIC"].iter().enumerate() {
        let m = rows(&a.join(format!("{name}_metrics.csv")));
        let row = &summary[k + 1];
        assert_eq!(row[0], *name);
        assert_eq!(row[1], m[1][2]);
        assert_eq!(row[3], m[1][4]);
        assert_eq!(row[4], m[1][5]);
        if m[1][3] != "not_settled" {
            assert_eq!(row[2], m[1][3]);
        }
    }
}

#[test]
fn batch_summary_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{MINIMAL}\n[batch]\ntrials = 4\n");
    let cfg = write_config(dir.path(), &text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(aicsim(&["batch", "--config", &cfg, "--out", s(&a)]).status.success());
    assert!(aicsim(&["batch", "--config", &cfg, "--out", s(&b)]).status.success());
    for f in ["summary.csv", "summary_detail.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    let c = dir.path().join("c");
    assert!(aicsim(&["batch", "--config", &cfg, "--out", s(&c), "--seed", "99"]).status.success());
    assert_ne!(fs::read(a.join("summary.csv")).unwrap(), fs::read(c.join("summary.csv")).unwrap());
}

#[test]
fn sweep_argument_errors_produce_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let out = dir.path().join("out");
    let o = aicsim(&["sweep", "--config", &cfg, "--out", s(&out), "--param", "tau_inv", "--values"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let o = aicsim(&["sweep", "--config", &cfg, "--out", s(&out), "--param", "kappa", "--values", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa"));
    assert!(!out.exists());
    let o = aicsim(&["sweep", "--config", &cfg, "--out", s(&out), "--param", "tau_inv", "--values", "fast"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn tau_sweep_writes_one_trajectory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = configs().join("tau_sweep.toml");
    let o = aicsim(&["sweep", "--config", s(&cfg), "--out", s(&out), "--param", "tau_inv", "--values", "0.1", "1", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for v in ["0.1", "1", "8"] {
        assert!(out.join(format!("sweep_tau_inv_{v}_estimator_trajectory.csv")).exists());
    }
    let long = rows(&out.join("sweep_tau_inv.csv"));
    assert_eq!(long[0][..4], ["parameter", "value", "status", "scenario"]);
    assert_eq!(long.len(), 4);
    let values: Vec<f64> = long[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(values, [0.1, 1.0, 8.0]);
    assert!(long[1..].iter().all(|r| r[2] == "ok"));
}

#[test]
fn sigma_p_sweep_is_smoothing_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = configs().join("smoothing.toml");
    let o = aicsim(&["sweep", "--config", s(&cfg), "--out", s(&out), "--param", "sigma_p", "--values", "inf", "10", "1", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let long = rows(&out.join("sweep_sigma_p.csv"));
    let col = long[0].iter().position(|h| h.starts_with("control_increment_ms")).unwrap();
    let inc: Vec<f64> = long[1..].iter().map(|r| r[col].parse().unwrap()).collect();
    assert_eq!(inc.len(), 4);
    assert!(inc.windows(2).all(|w| w[1] <= w[0]), "{inc:?}");
    assert!(long[1][1].parse::<f64>().unwrap().is_infinite());
}

#[test]
fn effective_config_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = aicsim(&["simulate", "--config", &cfg, "--out", s(&a), "--seed", "17", "--dump-effective-config"]);
    assert!(o.status.success());
    let dumped = a.join("effective_config.toml");
    assert!(fs::read_to_string(&dumped).unwrap().contains("seed = 17"));
    assert!(aicsim(&["simulate", "--config", s(&dumped), "--out", s(&b)]).status.success());
    for f in ["AIC_trajectory.csv", "u-AIC_trajectory.csv", "AIC_metrics.csv", "u-AIC_metrics.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn output_dir_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_aicsim"))
        .args(["simulate", "--config", &cfg])
        .env("AICSIM_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("AIC_trajectory.csv").exists());
}

#[test]
fn divergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &MINIMAL.replace("kappa_mu = 20.0", "kappa_mu = 5000.0"));
    let out = dir.path().join("out");
    let o = aicsim(&["simulate", "--config", &cfg, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("aic diverged on joint"), "{err}");
    // the partial trajectory is kept for inspection, the healthy scenario still completes
    assert!(out.join("AIC_trajectory.csv").exists());
    assert!(out.join("u-AIC_metrics.csv").exists());
    assert!(!out.join("AIC_metrics.csv").exists());
}

#[test]
fn collision_trajectory_shape() {
    // belief leaves the truth under the AIC while blocked, not under the u-AIC
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = aicsim(&["simulate", "--config", s(&configs().join("reference.toml")), "--out", s(&out)]);
    assert!(o.status.success());
    let gap = |name: &str| {
        let t = rows(&out.join(format!("{name}_trajectory.csv")));
        t[1..]
            .iter()
            .map(|r| r.iter().map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .filter(|r| r[0] >= 2.5 && r[0] < 5.0)
            .map(|r| (r[9] - r[1]).abs().max((r[10] - r[2]).abs()))
            .fold(0.0, f64::max)
    };
    let (aic, uaic) = (gap("AIC"), gap("u-AIC"));
    assert!(aic > 0.05, "{aic}");
    assert!(uaic < 5e-3, "{uaic}");
}
