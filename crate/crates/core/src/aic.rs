//! The standard active inference controller.
//!
//! Estimation is gradient descent on the generalized-motion free energy with
//! the goal prior `f(mu) = (mu_g - mu) / tau`; control is the chain-rule law
//! driven by sensory prediction errors, which integrates them. Both are
//! explicit-Euler discretizations on the controller step `dt`, estimation first.

use crate::error::{config, Error, Result};
use crate::model::{grad_free_energy_aic, GaussianBeliefState, GoalSpec, Observation, PrecisionSet, SIGMA_MIN};
use crate::scalar::{clamp_abs, half, lit, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct AicConfig<T> {
    /// Estimation learning rate (1/s).
    pub kappa_mu: T,
    /// Action learning rate.
    pub kappa_a: T,
    pub dt: T,
    /// Symmetric clamp on the whole action.
    pub u_saturation: T,
    pub precision_learning: bool,
    pub kappa_sigma: T,
    /// Also learn the velocity sensor variance when precision learning is on.
    pub learn_velocity_precision: bool,
}

impl<T: Scalar> AicConfig<T> {
    pub fn new(kappa_mu: T, kappa_a: T, dt: T, u_saturation: T) -> Self {
        Self {
            kappa_mu,
            kappa_a,
            dt,
            u_saturation,
            precision_learning: false,
            kappa_sigma: T::zero(),
            learn_velocity_precision: false,
        }
    }

    pub fn with_precision_learning(mut self, kappa_sigma: T) -> Self {
        self.precision_learning = true;
        self.kappa_sigma = kappa_sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v.is_finite() && v > T::zero();
        if !pos(self.kappa_mu) || !pos(self.kappa_a) || !pos(self.dt) || !pos(self.u_saturation) {
            return Err(config("AIC requires kappa_mu, kappa_a, dt, u_saturation > 0"));
        }
        if self.precision_learning && !pos(self.kappa_sigma) {
            return Err(config("precision learning requires kappa_sigma > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AicState<T> {
    pub belief: GaussianBeliefState<T>,
    /// Action currently applied to the plant.
    pub u: Vec<T>,
    /// Variances; the sensor ones evolve when precision learning is enabled.
    pub prec: PrecisionSet<T>,
    /// Ticks completed.
    pub step: u64,
}

impl<T: Scalar> AicState<T> {
    pub fn new(belief: GaussianBeliefState<T>, prec: PrecisionSet<T>) -> Self {
        let n = belief.n_joints();
        Self {
            belief,
            u: vec![T::zero(); n],
            prec,
            step: 0,
        }
    }

    /// Belief initialized at the first measurement, zero acceleration and action.
    pub fn from_observation(obs: &Observation<T>, prec: PrecisionSet<T>) -> Self {
        Self::new(GaussianBeliefState::aic(obs.y.clone(), obs.y_prime.clone()), prec)
    }
}

fn diverged<T: Scalar>(values: &[T], step: u64, time: f64) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(joint) => Err(Error::Divergence {
            controller: "aic",
            joint,
            step,
            time,
        }),
        None => Ok(()),
    }
}

/// One Euler step of `mu~ <- mu~ + dt (D mu~ - kappa_mu dF/dmu~)` where `D`
/// shifts each order up and `D mu'' = 0`.
pub fn aic_estimate_step<T: Scalar>(
    mut state: AicState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    cfg: &AicConfig<T>,
) -> Result<AicState<T>> {
    let grad = grad_free_energy_aic(&state.belief, obs, goal, &state.prec)?;
    let (dt, k) = (cfg.dt, cfg.kappa_mu);
    let b = &mut state.belief;
    let mdd = b.mu_double_prime.as_mut().expect("checked by gradient");
    for j in 0..b.mu.len() {
        let (mu, mp, ma) = (b.mu[j], b.mu_prime[j], mdd[j]);
        b.mu[j] = mu + dt * (mp - k * grad.d_mu[j]);
        b.mu_prime[j] = mp + dt * (ma - k * grad.d_mu_prime[j]);
        mdd[j] = ma - dt * k * grad.d_mu_double_prime[j];
    }
    diverged(&b.mu, state.step, obs.timestamp)?;
    diverged(&b.mu_prime, state.step, obs.timestamp)?;
    diverged(mdd, state.step, obs.timestamp)?;
    Ok(state)
}

/// Chain-rule control law `u' = -kappa_a (eps_y / s_y + eps_y' / s_y')`, one
/// Euler step, then clamped to the actuator limit.
pub fn aic_control_step<T: Scalar>(
    mut state: AicState<T>,
    obs: &Observation<T>,
    cfg: &AicConfig<T>,
) -> Result<AicState<T>> {
    let n = state.belief.n_joints();
    obs.validate(n)?;
    for j in 0..n {
        let drive = (obs.y[j] - state.belief.mu[j]) / state.prec.sigma_y.get(j)
            + (obs.y_prime[j] - state.belief.mu_prime[j]) / state.prec.sigma_y_prime.get(j);
        state.u[j] = clamp_abs(state.u[j] - cfg.dt * cfg.kappa_a * drive, cfg.u_saturation);
    }
    diverged(&state.u, state.step, obs.timestamp)?;
    Ok(state)
}

/// `dF/dsigma = -eps^2 / (2 sigma^2) + 1 / (2 sigma)` for one diagonal sensor variance.
#[inline]
pub fn sensor_variance_gradient<T: Scalar>(eps: T, sigma: T) -> T {
    half::<T>() * (sigma.recip() - eps * eps / (sigma * sigma))
}

/// Gradient step on the sensor variances, floored at [`SIGMA_MIN`].
/// A no-op unless precision learning is enabled.
pub fn precision_learning_step<T: Scalar>(
    mut state: AicState<T>,
    obs: &Observation<T>,
    cfg: &AicConfig<T>,
) -> Result<AicState<T>> {
    if !cfg.precision_learning {
        return Ok(state);
    }
    let n = state.belief.n_joints();
    let floor = lit::<T>(SIGMA_MIN);
    let rate = cfg.dt * cfg.kappa_sigma;
    state.prec.sigma_y.expand(n);
    for j in 0..n {
        let s = state.prec.sigma_y.get(j);
        let g = sensor_variance_gradient(obs.y[j] - state.belief.mu[j], s);
        state.prec.sigma_y.set(j, (s - rate * g).max(floor));
    }
    if cfg.learn_velocity_precision {
        state.prec.sigma_y_prime.expand(n);
        for j in 0..n {
            let s = state.prec.sigma_y_prime.get(j);
            let g = sensor_variance_gradient(obs.y_prime[j] - state.belief.mu_prime[j], s);
            state.prec.sigma_y_prime.set(j, (s - rate * g).max(floor));
        }
    }
    Ok(state)
}

/// Estimate, control, then (optionally) precision learning. Returns the action
/// to apply this tick.
pub fn aic_tick<T: Scalar>(
    state: AicState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    cfg: &AicConfig<T>,
) -> Result<(AicState<T>, Vec<T>)> {
    let state = aic_estimate_step(state, obs, goal, cfg)?;
    let state = aic_control_step(state, obs, cfg)?;
    let mut state = precision_learning_step(state, obs, cfg)?;
    state.step += 1;
    let u = state.u.clone();
    Ok((state, u))
}
