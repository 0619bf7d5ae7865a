//! Independent oracles shared by the integration tests. Nothing here calls the
//! library's own free-energy or fixed-point code.
#![allow(dead_code)]

use std::sync::Arc;

use aic_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// AIC free energy summed term by term, written directly from the model:
/// four Gaussian factors with diagonal variances, constant dropped.
pub fn aic_oracle(b: &BeliefF64, o: &Observation<f64>, g: &GoalSpec<f64>, p: &PrecisionSetF64) -> f64 {
    let n = b.mu.len();
    let mdd = b.mu_double_prime.as_ref().unwrap();
    let mut total = 0.0;
    for j in 0..n {
        let errors = [
            (o.y[j] - b.mu[j], p.sigma_y.get(j)),
            (o.y_prime[j] - b.mu_prime[j], p.sigma_y_prime.get(j)),
            (b.mu_prime[j] - g.tau_inv * (g.mu_g[j] - b.mu[j]), p.sigma_mu.get(j)),
            (mdd[j] - g.tau_inv * (g.mu_g_prime[j] - b.mu_prime[j]), p.sigma_mu_prime.get(j)),
        ];
        for (e, s) in errors {
            total += 0.5 * (e * e / s + s.ln());
        }
    }
    total
}

pub struct UaicCase {
    pub belief: BeliefF64,
    pub obs: Observation<f64>,
    pub prediction: StatePrediction<f64>,
    pub goal: GoalSpec<f64>,
    pub gains: PidGains<f64>,
    pub integral: Vec<f64>,
    pub prec: PrecisionSetF64,
    pub ext: ExtensionConfig<f64>,
    /// Affine feed-forward coefficients `(offset, position gain, velocity gain)` per joint.
    pub ff: Option<Vec<(f64, f64, f64)>>,
    pub u_prev: Vec<f64>,
}

impl UaicCase {
    pub fn inputs(&self) -> UaicInputs<'_, f64> {
        UaicInputs {
            obs: &self.obs,
            prediction: &self.prediction,
            goal: &self.goal,
            prior: ControlPrior {
                gains: &self.gains,
                integral: &self.integral,
            },
            prec: &self.prec,
            extensions: &self.ext,
            u_prev: &self.u_prev,
            couple_state: true,
        }
    }
}

/// PID law on the belief error, written out independently.
pub fn pid_oracle(kp: f64, ki: f64, kd: f64, e: f64, e_dot: f64, integral: f64) -> f64 {
    kp * e + kd * e_dot + ki * integral
}

pub fn uaic_oracle(c: &UaicCase) -> f64 {
    let n = c.belief.mu.len();
    let mu_u = c.belief.mu_u.as_ref().unwrap();
    let mut total = 0.0;
    let mut add = |e: f64, s: f64| total += 0.5 * (e * e / s + s.ln());
    for j in 0..n {
        let (mu, mp) = (c.belief.mu[j], c.belief.mu_prime[j]);
        let fs = pid_oracle(
            c.gains.kp.get(j),
            c.gains.ki.get(j),
            c.gains.kd.get(j),
            c.goal.mu_g[j] - mu,
            c.goal.mu_g_prime[j] - mp,
            c.integral[j],
        );
        add(c.obs.y[j] - mu, c.prec.sigma_y.get(j));
        add(c.obs.y_prime[j] - mp, c.prec.sigma_y_prime.get(j));
        add(mu - c.prediction.position[j], c.prec.sigma_x.get(j));
        add(mp - c.prediction.velocity[j], c.prec.sigma_x.get(j));
        add(mu_u[j] - fs, c.prec.sigma_u.get(j));
        if let Some(ff) = &c.ff {
            let (o, kq, kv) = ff[j];
            add(mu_u[j] - (o + kq * mu + kv * mp), c.prec.sigma_ol.as_ref().unwrap().get(j));
        }
        if c.ext.control_cost {
            add(mu_u[j], c.prec.sigma_cc.as_ref().unwrap().get(j));
        }
        if c.ext.smoothing {
            add(mu_u[j] - c.u_prev[j], c.prec.sigma_p.as_ref().unwrap().get(j));
        }
    }
    total
}

fn vec_in(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(lo..hi)).collect()
}

fn variances(r: &mut ChaCha8Rng, n: usize) -> PerJoint<f64> {
    if r.random_bool(0.3) {
        PerJoint::scalar(r.random_range(0.2..3.0))
    } else {
        PerJoint::per_joint(vec_in(r, n, 0.2, 3.0))
    }
}

pub fn random_aic(r: &mut ChaCha8Rng) -> (BeliefF64, Observation<f64>, GoalSpec<f64>, PrecisionSetF64) {
    let n = r.random_range(1..=4);
    let mut b = GaussianBeliefState::aic(vec_in(r, n, -2.0, 2.0), vec_in(r, n, -2.0, 2.0));
    b.mu_double_prime = Some(vec_in(r, n, -2.0, 2.0));
    let o = Observation::new(vec_in(r, n, -2.0, 2.0), vec_in(r, n, -2.0, 2.0), 0.0);
    let g = GoalSpec {
        mu_g: vec_in(r, n, -2.0, 2.0),
        mu_g_prime: vec_in(r, n, -1.0, 1.0),
        tau_inv: r.random_range(0.0..3.0),
    };
    let mut p = PrecisionSet::uniform(1.0);
    p.sigma_y = variances(r, n);
    p.sigma_y_prime = variances(r, n);
    p.sigma_mu = variances(r, n);
    p.sigma_mu_prime = variances(r, n);
    (b, o, g, p)
}

/// Random u-AIC instance; each extension is enabled with probability 1/2,
/// or all three when `all_extensions`.
pub fn random_uaic(r: &mut ChaCha8Rng, all_extensions: bool) -> UaicCase {
    let n = r.random_range(1..=4);
    let belief = GaussianBeliefState::uaic(vec_in(r, n, -2.0, 2.0), vec_in(r, n, -2.0, 2.0), vec_in(r, n, -3.0, 3.0));
    let mut prec = PrecisionSet::uniform(1.0);
    prec.sigma_y = variances(r, n);
    prec.sigma_y_prime = variances(r, n);
    prec.sigma_x = variances(r, n);
    prec.sigma_u = variances(r, n);
    let mut ext = ExtensionConfig::none();
    let mut ff = None;
    if all_extensions || r.random_bool(0.5) {
        let coeffs: Vec<(f64, f64, f64)> = (0..n)
            .map(|_| (r.random_range(-1.0..1.0), r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)))
            .collect();
        ext.open_loop = Some(Arc::new(AffineFeedForward {
            offset: PerJoint::per_joint(coeffs.iter().map(|c| c.0).collect()),
            position_gain: PerJoint::per_joint(coeffs.iter().map(|c| c.1).collect()),
            velocity_gain: PerJoint::per_joint(coeffs.iter().map(|c| c.2).collect()),
        }));
        prec.sigma_ol = Some(variances(r, n));
        ff = Some(coeffs);
    }
    if all_extensions || r.random_bool(0.5) {
        ext.control_cost = true;
        prec.sigma_cc = Some(variances(r, n));
    }
    if all_extensions || r.random_bool(0.5) {
        ext.smoothing = true;
        prec.sigma_p = Some(variances(r, n));
    }
    UaicCase {
        belief,
        obs: Observation::new(vec_in(r, n, -2.0, 2.0), vec_in(r, n, -2.0, 2.0), 0.0),
        prediction: StatePrediction {
            position: vec_in(r, n, -2.0, 2.0),
            velocity: vec_in(r, n, -2.0, 2.0),
        },
        goal: GoalSpec {
            mu_g: vec_in(r, n, -2.0, 2.0),
            mu_g_prime: vec_in(r, n, -1.0, 1.0),
            tau_inv: 1.0,
        },
        gains: PidGains {
            kp: PerJoint::per_joint(vec_in(r, n, 0.0, 3.0)),
            ki: PerJoint::per_joint(vec_in(r, n, 0.0, 3.0)),
            kd: PerJoint::per_joint(vec_in(r, n, 0.0, 3.0)),
        },
        integral: vec_in(r, n, -1.0, 1.0),
        prec,
        ext,
        ff,
        u_prev: vec_in(r, n, -3.0, 3.0),
    }
}

pub const FD_STEP: f64 = 1e-6;

/// Central difference of `f` along every coordinate of `x`.
pub fn central_diff(x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut xs = x.to_vec();
    (0..x.len())
        .map(|i| {
            xs[i] = x[i] + FD_STEP;
            let up = f(&xs);
            xs[i] = x[i] - FD_STEP;
            let down = f(&xs);
            xs[i] = x[i];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Max-norm relative error `|a - b|_inf / |b|_inf`.
pub fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic.iter().zip(numeric).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = numeric.iter().map(|v| v.abs()).fold(0.0, f64::max);
    diff / scale
}

/// Worst finite-difference relative error of the AIC gradient over `count` random instances.
pub fn aic_gradient_check(seed: u64, count: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let (b, o, g, p) = random_aic(&mut r);
        let n = b.mu.len();
        let grad = grad_free_energy_aic(&b, &o, &g, &p).unwrap();
        let mut x = b.mu.clone();
        x.extend(&b.mu_prime);
        x.extend(b.mu_double_prime.as_ref().unwrap());
        let fd = central_diff(&x, |x| {
            let mut bb = GaussianBeliefState::aic(x[..n].to_vec(), x[n..2 * n].to_vec());
            bb.mu_double_prime = Some(x[2 * n..].to_vec());
            free_energy_aic(&bb, &o, &g, &p).unwrap().value
        });
        let mut a = grad.d_mu.clone();
        a.extend(&grad.d_mu_prime);
        a.extend(&grad.d_mu_double_prime);
        worst = worst.max(rel_err(&a, &fd));
    }
    worst
}

/// Worst finite-difference relative error of the u-AIC gradient over `count` random instances.
pub fn uaic_gradient_check(seed: u64, count: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let c = random_uaic(&mut r, false);
        let n = c.belief.mu.len();
        let inp = c.inputs();
        let grad = grad_free_energy_uaic(&c.belief, &inp).unwrap();
        let mut x = c.belief.mu.clone();
        x.extend(&c.belief.mu_prime);
        x.extend(c.belief.mu_u.as_ref().unwrap());
        let fd = central_diff(&x, |x| {
            let bb = GaussianBeliefState::uaic(x[..n].to_vec(), x[n..2 * n].to_vec(), x[2 * n..].to_vec());
            free_energy_uaic(&bb, &inp).unwrap().value
        });
        let mut a = grad.d_mu.clone();
        a.extend(&grad.d_mu_prime);
        a.extend(&grad.d_mu_u);
        worst = worst.max(rel_err(&a, &fd));
    }
    worst
}

/// Underdamped `x'' + 2 zeta w x' + w^2 x = 0` from `(x0, v0)`.
pub fn damped_oscillator(zeta: f64, wn: f64, x0: f64, v0: f64, t: f64) -> (f64, f64) {
    let wd = wn * (1.0 - zeta * zeta).sqrt();
    let s = zeta * wn;
    let a = x0;
    let b = (v0 + s * x0) / wd;
    let e = (-s * t).exp();
    let (sn, cs) = (wd * t).sin_cos();
    let x = e * (a * cs + b * sn);
    let v = e * (-s * (a * cs + b * sn) + wd * (-a * sn + b * cs));
    (x, v)
}

/// Max error of the RK4 mass-spring-damper against the analytic solution.
pub fn msd_max_error(dt: f64, horizon: f64) -> f64 {
    let p = MsdParams::<f64>::default();
    let zeta = p.k2 / (2.0 * (p.k1 * p.mass).sqrt());
    let wn = (p.k1 / p.mass).sqrt();
    let mut s = PlantState::new(vec![-0.5], vec![-1.0]);
    let steps = (horizon / dt).round() as usize;
    let mut worst: f64 = 0.0;
    for k in 1..=steps {
        s = msd_step(&s, 0.0, dt, &p);
        let (x, _) = damped_oscillator(zeta, wn, -0.5, -1.0, k as f64 * dt);
        worst = worst.max((s.q[0] - x).abs());
    }
    worst
}

/// Loads a shipped config from the workspace `configs/` directory.
pub fn shipped(name: &str) -> RunConfig {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    RunConfig::load(path).unwrap()
}
