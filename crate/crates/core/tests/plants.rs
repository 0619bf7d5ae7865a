mod common;

use aic_core::harness::*;
use aic_core::*;
use common::*;

#[test]
fn msd_matches_analytic_solution() {
    assert!(msd_max_error(1e-3, 10.0) < 1e-6);
}

#[test]
fn msd_is_fourth_order() {
    // one period of the undamped frequency, dt halved
    let coarse = msd_max_error(0.1, 6.3);
    let fine = msd_max_error(0.05, 6.3);
    assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
}

#[test]
fn undamped_msd_conserves_energy() {
    let p = MsdParams { k1: 1.0, k2: 0.0, mass: 1.0 };
    let energy = |s: &PlantState<f64>| 0.5 * p.mass * s.q_dot[0].powi(2) + 0.5 * p.k1 * s.q[0].powi(2);
    let mut s = PlantState::new(vec![-0.5], vec![-1.0]);
    let e0 = energy(&s);
    for _ in 0..100_000 {
        s = msd_step(&s, 0.0, 1e-3, &p);
    }
    assert!((energy(&s) - e0).abs() / e0 < 1e-8);
}

#[test]
fn frictionless_double_integrator_is_exact_kinematics() {
    let model = ArmModel::DoubleIntegrator { damping: 0.0_f64 };
    let mut s = PlantState::new(vec![0.1, -0.2], vec![0.5, 0.0]);
    let u = [2.0, -1.0];
    let dt = 1e-2;
    for _ in 0..300 {
        s = arm_step(&s, &u, dt, &model).unwrap();
    }
    let t = 3.0;
    for (j, (q0, v0)) in [(0.1, 0.5), (-0.2, 0.0)].into_iter().enumerate() {
        assert!((s.q[j] - (q0 + v0 * t + 0.5 * u[j] * t * t)).abs() < 1e-10);
        assert!((s.q_dot[j] - (v0 + u[j] * t)).abs() < 1e-10);
    }
}

#[test]
fn free_two_link_conserves_kinetic_energy() {
    let p = TwoLinkParams { damping: 0.0_f64, ..TwoLinkParams::default() };
    let model = ArmModel::TwoLink(p.clone());
    let mut s = PlantState::new(vec![0.3, -0.6], vec![1.0, -0.5]);
    let e0 = p.kinetic_energy(&s.q, &s.q_dot);
    for _ in 0..10_000 {
        s = arm_step(&s, &[0.0, 0.0], 1e-3, &model).unwrap();
    }
    assert!((p.kinetic_energy(&s.q, &s.q_dot) - e0).abs() / e0 < 1e-8);
}

#[test]
fn two_link_mass_matrix_is_symmetric_positive() {
    let p = TwoLinkParams::<f64>::default();
    for q2 in [-3.0, -1.0, 0.0, 0.5, 2.0] {
        let m = p.mass_matrix(q2);
        assert_eq!(m[0][1], m[1][0]);
        assert!(m[0][0] > 0.0 && m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0);
    }
}

#[test]
fn sensor_noise_has_configured_spread() {
    let mut sensors = Sensors::new(SensorModel { noise_std_pos: 0.01, noise_std_vel: 0.01, seed: 5 });
    let state = PlantState::at_rest(vec![0.25]);
    let n = 100_000;
    let (mut sum, mut sq, mut sum_v, mut sq_v) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let o = sensors.sense(&state);
        let (e, ev) = (o.y[0] - 0.25, o.y_prime[0]);
        sum += e;
        sq += e * e;
        sum_v += ev;
        sq_v += ev * ev;
    }
    let nf = n as f64;
    for (s, q) in [(sum, sq), (sum_v, sq_v)] {
        let mean = s / nf;
        let std = (q / nf - mean * mean).sqrt();
        assert!(mean.abs() < 1e-4);
        assert!((std / 0.01 - 1.0).abs() < 0.02, "{std}");
    }
}

#[test]
fn sensors_are_deterministic_per_seed() {
    let model = SensorModel { noise_std_pos: 0.1, noise_std_vel: 0.2, seed: 9 };
    let state = PlantState::at_rest(vec![0.0, 1.0]);
    let mut a = Sensors::new(model.clone());
    let mut b = Sensors::new(model.clone());
    let mut c = Sensors::new(SensorModel { seed: 10, ..model });
    let (oa, ob, oc) = (a.sense(&state), b.sense(&state), c.sense(&state));
    assert_eq!(oa, ob);
    assert_ne!(oa.y, oc.y);
}

#[test]
fn collision_freezes_and_releases_the_plant() {
    let cfg = RunConfig::from_toml_str(
        r#"
seed = 3
dt = 0.001
episode_length = 9.0
[plant]
kind = "arm"
damping = 1.0
q0 = [0.0]
[sensors]
noise_std_pos = 0.0
noise_std_vel = 0.0
[goal]
kind = "constant"
mu_g = [1.0]
[collision]
start = 3.0
duration = 3.0
[pi]
kp = 2.0
ki = 1.0
u_saturation = 10.0
[[scenario]]
name = "pi"
controller = "pi"
"#,
    )
    .unwrap();
    let scenario = cfg.scenarios().unwrap().remove(0);
    let ep = run_episode(&scenario).unwrap().into_episode().unwrap();
    let ticks = &ep.record.ticks;
    let inside: Vec<_> = ticks.iter().filter(|r| r.t >= 3.0 && r.t < 6.0).collect();
    assert_eq!(inside.len(), 3000);
    assert!(inside.iter().all(|r| r.blocked && r.q == inside[0].q && r.q_dot == vec![0.0]));
    let before = ticks.iter().rev().find(|r| r.t < 3.0).unwrap();
    assert!(before.q_dot[0].abs() > 0.0);
    let after: Vec<_> = ticks.iter().filter(|r| r.t >= 6.0).collect();
    assert!(after.iter().all(|r| !r.blocked));
    assert!(after.last().unwrap().q[0] != inside[0].q[0]);
}
