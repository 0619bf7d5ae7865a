//! Closed-form stationary points of the belief and action updates.

use crate::error::{contract, Result};
use crate::model::control_prior::{f_star_joint, ControlPrior};
use crate::model::free_energy::{StatePrediction, UaicInputs};
use crate::model::types::{GaussianBeliefState, GoalSpec, PrecisionSet};
use crate::scalar::Scalar;

/// Belief at which `dF/dmu = 0` for fixed `mu'`: a precision-weighted blend of
/// the measurement and the goal.
///
/// `mu = (s_mu y + s_y a^2 mu_g - s_y a mu') / (s_mu + s_y a^2)` with `a = 1/tau`;
/// for `a = 1` this is `(s_mu y + s_y mu_g - s_y mu') / (s_mu + s_y)`.
pub fn aic_fixed_point<T: Scalar>(
    y: &[T],
    mu_prime: &[T],
    goal: &GoalSpec<T>,
    prec: &PrecisionSet<T>,
) -> Result<Vec<T>> {
    let n = y.len();
    if mu_prime.len() != n {
        return Err(contract("y and mu_prime dimension mismatch"));
    }
    goal.validate(n)?;
    prec.validate(n)?;
    let a = goal.tau_inv;
    Ok((0..n)
        .map(|j| {
            let (sy, sm) = (prec.sigma_y.get(j), prec.sigma_mu.get(j));
            (sm * y[j] + sy * a * a * goal.mu_g[j] - sy * a * mu_prime[j]) / (sm + sy * a * a)
        })
        .collect())
}

/// Equilibrium of the full AIC estimation flow `mu~' = D mu~ - kappa dF/dmu~`
/// for constant observations.
///
/// At this point `dF/dmu = mu' / kappa` rather than zero, so the position
/// belief differs from [`aic_fixed_point`] by `(mu'/kappa) s_y s_mu / (s_mu + s_y a^2)`;
/// the two agree as `kappa` grows.
pub fn aic_flow_equilibrium<T: Scalar>(
    y: &[T],
    y_prime: &[T],
    goal: &GoalSpec<T>,
    prec: &PrecisionSet<T>,
    kappa_mu: T,
) -> Result<GaussianBeliefState<T>> {
    let n = y.len();
    if y_prime.len() != n {
        return Err(contract("y and y_prime dimension mismatch"));
    }
    if !(kappa_mu > T::zero()) {
        return Err(contract("kappa_mu must be > 0"));
    }
    goal.validate(n)?;
    prec.validate(n)?;
    let a = goal.tau_inv;
    let k = kappa_mu;
    let mut mu = Vec::with_capacity(n);
    let mut mp = Vec::with_capacity(n);
    let mut mdd = Vec::with_capacity(n);
    for j in 0..n {
        let (sy, syp, sm) = (
            prec.sigma_y.get(j),
            prec.sigma_y_prime.get(j),
            prec.sigma_mu.get(j),
        );
        let (g, gp) = (goal.mu_g[j], goal.mu_g_prime[j]);
        // Stationarity: mu' = k dF/dmu, mu'' = k dF/dmu', eps_mu' = 0.
        let a11 = k / sy + k * a * a / sm;
        let a12 = k * a / sm - T::one();
        let b1 = k * y[j] / sy + k * a * a * g / sm;
        let a21 = k * a / sm;
        let a22 = k / syp + k / sm + a;
        let b2 = k * y_prime[j] / syp + k * a * g / sm + a * gp;
        let det = a11 * a22 - a12 * a21;
        let m = (b1 * a22 - a12 * b2) / det;
        let m1 = (a11 * b2 - a21 * b1) / det;
        mu.push(m);
        mp.push(m1);
        mdd.push(a * (gp - m1));
    }
    Ok(GaussianBeliefState {
        mu,
        mu_prime: mp,
        mu_double_prime: Some(mdd),
        mu_u: None,
    })
}

/// Stationary point of the u-AIC without extensions: state belief is the
/// precision-weighted average of measurement and prediction, and the action
/// belief equals `f*` there.
pub fn uaic_fixed_point<T: Scalar>(
    y: &[T],
    y_prime: &[T],
    prediction: &StatePrediction<T>,
    goal: &GoalSpec<T>,
    prior: ControlPrior<'_, T>,
    prec: &PrecisionSet<T>,
) -> Result<GaussianBeliefState<T>> {
    let n = y.len();
    if y_prime.len() != n || prediction.position.len() != n || prediction.velocity.len() != n {
        return Err(contract("dimension mismatch"));
    }
    prec.validate(n)?;
    goal.validate(n)?;
    let blend = |meas: T, pred: T, s_meas: T, s_x: T| (s_x * meas + s_meas * pred) / (s_x + s_meas);
    let mut mu = Vec::with_capacity(n);
    let mut mp = Vec::with_capacity(n);
    let mut mu_u = Vec::with_capacity(n);
    for j in 0..n {
        let sx = prec.sigma_x.get(j);
        let m = blend(y[j], prediction.position[j], prec.sigma_y.get(j), sx);
        let v = blend(y_prime[j], prediction.velocity[j], prec.sigma_y_prime.get(j), sx);
        mu_u.push(f_star_joint(j, m, v, goal, prior.integral[j], prior.gains));
        mu.push(m);
        mp.push(v);
    }
    Ok(GaussianBeliefState::uaic(mu, mp, mu_u))
}

/// Stationary action belief for a fixed state belief: the precision-weighted
/// mean of `f*` and every enabled prior mean (`f_ol`, `0`, `u_prev`).
pub fn uaic_action_fixed_point<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    inp: &UaicInputs<'_, T>,
) -> Result<Vec<T>> {
    let n = belief.n_joints();
    let ext = inp.extensions.resolve(inp.prec)?;
    Ok((0..n)
        .map(|j| {
            let (mu, mp) = (belief.mu[j], belief.mu_prime[j]);
            let su = inp.prec.sigma_u.get(j);
            let mut num = f_star_joint(j, mu, mp, inp.goal, inp.prior.integral[j], inp.prior.gains) / su;
            let mut den = su.recip();
            if let (Some(law), Some(s)) = (&inp.extensions.open_loop, ext.sigma_ol) {
                num = num + law.value(j, mu, mp) / s.get(j);
                den = den + s.recip(j);
            }
            if let Some(s) = ext.sigma_cc {
                den = den + s.recip(j);
            }
            if let Some(s) = ext.sigma_p {
                num = num + inp.u_prev[j] / s.get(j);
                den = den + s.recip(j);
            }
            num / den
        })
        .collect())
}
