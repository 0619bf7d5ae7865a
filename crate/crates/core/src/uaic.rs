//! The unbiased active inference controller.
//!
//! The action is an explicit random variable with prior `p(u | x)` centred on a
//! PID law `f*` of the state belief, so the goal no longer enters the state
//! prior. Estimation blends measurements with an Euler prediction of the
//! previous belief; the action belief descends its own gradient.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{config, Error, Result};
use crate::model::{
    grad_free_energy_uaic, ControlPrior, ExtensionConfig, GaussianBeliefState, GoalSpec,
    Observation, PidGains, PrecisionSet, StatePrediction, UaicInputs,
};
use crate::scalar::{clamp_abs, Scalar};

pub use crate::model::f_star;

/// Produces the state prediction `x_hat` from the previous belief.
pub trait StatePredictor<T: Scalar>: Send + Sync + Debug {
    fn predict(&self, belief: &GaussianBeliefState<T>, dt: T) -> StatePrediction<T>;
}

/// `x_hat = [[I, I dt], [0, I]] mu_x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct EulerPredictor;

impl<T: Scalar> StatePredictor<T> for EulerPredictor {
    fn predict(&self, belief: &GaussianBeliefState<T>, dt: T) -> StatePrediction<T> {
        predict_state(belief, dt)
    }
}

/// Euler propagation of the state belief.
pub fn predict_state<T: Scalar>(belief: &GaussianBeliefState<T>, dt: T) -> StatePrediction<T> {
    StatePrediction {
        position: belief
            .mu
            .iter()
            .zip(&belief.mu_prime)
            .map(|(&q, &v)| q + v * dt)
            .collect(),
        velocity: belief.mu_prime.clone(),
    }
}

#[derive(Clone, Debug)]
pub struct UaicConfig<T> {
    pub kappa_mu: T,
    pub kappa_u: T,
    pub dt: T,
    pub gains: PidGains<T>,
    /// Clamp applied to the integral term of `f*` only.
    pub integral_limit: T,
    /// Clamp on the emitted action.
    pub u_saturation: T,
    pub prec: PrecisionSet<T>,
    pub extensions: ExtensionConfig<T>,
    /// Propagate the action error back into the state gradient through `df*/dmu_x`.
    pub couple_state: bool,
    /// Replaces the Euler prediction when set.
    pub predictor: Option<Arc<dyn StatePredictor<T>>>,
}

impl<T: Scalar> UaicConfig<T> {
    pub fn new(kappa_mu: T, kappa_u: T, dt: T, gains: PidGains<T>, prec: PrecisionSet<T>) -> Self {
        Self {
            kappa_mu,
            kappa_u,
            dt,
            gains,
            integral_limit: T::infinity(),
            u_saturation: T::infinity(),
            prec,
            extensions: ExtensionConfig::none(),
            couple_state: true,
            predictor: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let pos = |v: T| v > T::zero() && !v.is_nan();
        if !pos(self.kappa_mu) || !pos(self.kappa_u) || !pos(self.dt) || !self.dt.is_finite() {
            return Err(config("u-AIC requires kappa_mu, kappa_u, dt > 0"));
        }
        if !pos(self.integral_limit) || !pos(self.u_saturation) {
            return Err(config("u-AIC requires integral_limit, u_saturation > 0"));
        }
        self.gains.validate(n)?;
        self.prec.validate(n)?;
        self.extensions.resolve(&self.prec)?;
        Ok(())
    }

    fn prediction(&self, belief: &GaussianBeliefState<T>) -> StatePrediction<T> {
        match &self.predictor {
            Some(p) => p.predict(belief, self.dt),
            None => predict_state(belief, self.dt),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UaicState<T> {
    /// `mu_x = [mu, mu']` and `mu_u`.
    pub belief: GaussianBeliefState<T>,
    /// Integral of `mu_g - mu`, clamped to the integral limit.
    pub integral: Vec<T>,
    /// Last emitted (clamped) action.
    pub u_prev: Vec<T>,
    pub step: u64,
}

impl<T: Scalar> UaicState<T> {
    pub fn new(belief: GaussianBeliefState<T>) -> Self {
        let n = belief.n_joints();
        Self {
            belief,
            integral: vec![T::zero(); n],
            u_prev: vec![T::zero(); n],
            step: 0,
        }
    }

    pub fn from_observation(obs: &Observation<T>) -> Self {
        let n = obs.y.len();
        Self::new(GaussianBeliefState::uaic(
            obs.y.clone(),
            obs.y_prime.clone(),
            vec![T::zero(); n],
        ))
    }

    /// State belief at the first measurement and action belief at the prior
    /// mean `f*` there, so the first ticks carry no action prediction error.
    pub fn at_prior(obs: &Observation<T>, goal: &GoalSpec<T>, gains: &PidGains<T>) -> Self {
        let mut state = Self::from_observation(obs);
        state.belief.mu_u = Some(f_star(&state.belief, goal, &state.integral, gains));
        state
    }

    pub fn mu_u(&self) -> &[T] {
        self.belief.mu_u.as_deref().unwrap_or(&[])
    }
}

fn check_finite<T: Scalar>(values: &[T], step: u64, time: f64) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(joint) => Err(Error::Divergence {
            controller: "uaic",
            joint,
            step,
            time,
        }),
        None => Ok(()),
    }
}

/// `mu_x <- mu_x - dt kappa_mu dF/dmu_x` against the supplied prediction.
pub fn uaic_estimate_step<T: Scalar>(
    mut state: UaicState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    prediction: &StatePrediction<T>,
    cfg: &UaicConfig<T>,
) -> Result<UaicState<T>> {
    let grad = {
        let inputs = UaicInputs {
            obs,
            prediction,
            goal,
            prior: ControlPrior {
                gains: &cfg.gains,
                integral: &state.integral,
            },
            prec: &cfg.prec,
            extensions: &cfg.extensions,
            u_prev: &state.u_prev,
            couple_state: cfg.couple_state,
        };
        grad_free_energy_uaic(&state.belief, &inputs)?
    };
    let rate = cfg.dt * cfg.kappa_mu;
    let b = &mut state.belief;
    for j in 0..b.mu.len() {
        b.mu[j] = b.mu[j] - rate * grad.d_mu[j];
        b.mu_prime[j] = b.mu_prime[j] - rate * grad.d_mu_prime[j];
    }
    check_finite(&b.mu, state.step, obs.timestamp)?;
    check_finite(&b.mu_prime, state.step, obs.timestamp)?;
    Ok(state)
}

/// Gradient of the action terms other than the smoothing prior.
fn explicit_action_gradient<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    mu_u: &[T],
    f_star: &[T],
    cfg: &UaicConfig<T>,
) -> Result<Vec<T>> {
    let ext = cfg.extensions.resolve(&cfg.prec)?;
    Ok((0..mu_u.len())
        .map(|j| {
            let mut g = (mu_u[j] - f_star[j]) / cfg.prec.sigma_u.get(j);
            if let (Some(law), Some(s)) = (&cfg.extensions.open_loop, ext.sigma_ol) {
                g = g + (mu_u[j] - law.value(j, belief.mu[j], belief.mu_prime[j])) / s.get(j);
            }
            if let Some(s) = ext.sigma_cc {
                g = g + mu_u[j] / s.get(j);
            }
            g
        })
        .collect())
}

/// Integral update, one gradient step on the action belief, and the clamped
/// action to emit.
///
/// The smoothing prior is integrated implicitly: its explicit gradient is zero
/// whenever `mu_u` equals the last emitted action, so an explicit step could
/// never smooth. All other terms are explicit.
pub fn uaic_control_step<T: Scalar>(
    mut state: UaicState<T>,
    goal: &GoalSpec<T>,
    cfg: &UaicConfig<T>,
) -> Result<(UaicState<T>, Vec<T>)> {
    let n = state.belief.n_joints();
    goal.validate(n)?;
    for j in 0..n {
        let acc = state.integral[j] + (goal.mu_g[j] - state.belief.mu[j]) * cfg.dt;
        state.integral[j] = clamp_abs(acc, cfg.integral_limit);
    }
    let target = f_star(&state.belief, goal, &state.integral, &cfg.gains);
    let mu_u = state.belief.require_action()?.to_vec();
    let grad = explicit_action_gradient(&state.belief, &mu_u, &target, cfg)?;
    let h = cfg.dt * cfg.kappa_u;
    let smoothing = if cfg.extensions.smoothing {
        cfg.prec.sigma_p.as_ref()
    } else {
        None
    };
    let next: Vec<T> = (0..n)
        .map(|j| {
            let explicit = mu_u[j] - h * grad[j];
            match smoothing {
                Some(s) => {
                    let w = h / s.get(j);
                    (explicit + w * state.u_prev[j]) / (T::one() + w)
                }
                None => explicit,
            }
        })
        .collect();
    check_finite(&next, state.step, f64::NAN)?;
    let u: Vec<T> = next.iter().map(|&v| clamp_abs(v, cfg.u_saturation)).collect();
    state.belief.mu_u = Some(next);
    state.u_prev.clone_from(&u);
    Ok((state, u))
}

/// Predict, estimate, control. Returns the action to apply this tick.
pub fn uaic_tick<T: Scalar>(
    state: UaicState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    cfg: &UaicConfig<T>,
) -> Result<(UaicState<T>, Vec<T>)> {
    let prediction = cfg.prediction(&state.belief);
    let state = uaic_estimate_step(state, obs, goal, &prediction, cfg)?;
    let (mut state, u) = uaic_control_step(state, goal, cfg).map_err(|e| match e {
        Error::Divergence { controller, joint, step, .. } => Error::Divergence {
            controller,
            joint,
            step,
            time: obs.timestamp,
        },
        other => other,
    })?;
    state.step += 1;
    Ok((state, u))
}
