//! Free-energy functionals of both controllers and their analytic gradients.
//!
//! All covariances are diagonal, so every functional is a sum over joints of
//! scalar terms `1/2 eps^2 / sigma` and `1/2 ln sigma`. The additive constant is
//! zero. Log-determinant terms enter the reported value but not the belief or
//! action gradients (they do not depend on the means).

use crate::error::{contract, Result};
use crate::model::control_prior::{f_star_joint, ControlPrior, ExtensionConfig};
use crate::model::types::{
    Factor, FreeEnergyReport, GaussianBeliefState, GoalSpec, Observation, PrecisionSet, Term,
};
use crate::scalar::{half, Scalar};

/// Maps a belief to the predicted sensor reading of one joint.
pub trait SensorMap<T: Scalar>: Send + Sync {
    /// Predicted `(y, y')` for `(mu, mu')`.
    fn predict(&self, joint: usize, mu: T, mu_prime: T) -> (T, T);

    /// `[[dy/dmu, dy/dmu'], [dy'/dmu, dy'/dmu']]`.
    fn jacobian(&self, joint: usize, mu: T, mu_prime: T) -> [[T; 2]; 2];
}

/// Encoders measuring the state directly: `g(mu) = mu`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdentitySensor;

impl<T: Scalar> SensorMap<T> for IdentitySensor {
    #[inline]
    fn predict(&self, _joint: usize, mu: T, mu_prime: T) -> (T, T) {
        (mu, mu_prime)
    }

    #[inline]
    fn jacobian(&self, _joint: usize, _mu: T, _mu_prime: T) -> [[T; 2]; 2] {
        [[T::one(), T::zero()], [T::zero(), T::one()]]
    }
}

/// Gradient of the AIC free energy with respect to each belief order.
#[derive(Clone, Debug, PartialEq)]
pub struct AicGradient<T> {
    pub d_mu: Vec<T>,
    pub d_mu_prime: Vec<T>,
    pub d_mu_double_prime: Vec<T>,
}

/// Gradient of the u-AIC free energy with respect to the state and action beliefs.
#[derive(Clone, Debug, PartialEq)]
pub struct UaicGradient<T> {
    pub d_mu: Vec<T>,
    pub d_mu_prime: Vec<T>,
    pub d_mu_u: Vec<T>,
}

/// Deterministic state prediction `x_hat = [q_hat, qdot_hat]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePrediction<T> {
    pub position: Vec<T>,
    pub velocity: Vec<T>,
}

fn check_aic_inputs<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    prec: &PrecisionSet<T>,
) -> Result<usize> {
    belief.validate()?;
    belief.require_double_prime()?;
    let n = belief.n_joints();
    obs.validate(n)?;
    goal.validate(n)?;
    prec.validate(n)?;
    Ok(n)
}

/// Per-joint prediction errors of the generalized-motion model.
struct AicErrors<T> {
    y: T,
    y_prime: T,
    mu: T,
    mu_prime: T,
}

#[inline]
fn aic_errors<T: Scalar>(
    j: usize,
    belief: &GaussianBeliefState<T>,
    mdd: &[T],
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    map: &impl SensorMap<T>,
) -> AicErrors<T> {
    let (mu, mp) = (belief.mu[j], belief.mu_prime[j]);
    let (gy, gyp) = map.predict(j, mu, mp);
    AicErrors {
        y: obs.y[j] - gy,
        y_prime: obs.y_prime[j] - gyp,
        mu: mp - (goal.mu_g[j] - mu) * goal.tau_inv,
        mu_prime: mdd[j] - (goal.mu_g_prime[j] - mp) * goal.tau_inv,
    }
}

/// AIC free energy with the identity sensor map.
pub fn free_energy_aic<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    prec: &PrecisionSet<T>,
) -> Result<FreeEnergyReport<T>> {
    free_energy_aic_mapped(belief, obs, goal, prec, &IdentitySensor)
}

/// AIC free energy: position and velocity sensors plus the goal prior on
/// velocity and acceleration beliefs, with `f(mu) = (mu_g - mu) / tau`.
pub fn free_energy_aic_mapped<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    prec: &PrecisionSet<T>,
    map: &impl SensorMap<T>,
) -> Result<FreeEnergyReport<T>> {
    let n = check_aic_inputs(belief, obs, goal, prec)?;
    let mdd = belief.require_double_prime()?;
    let h = half::<T>();
    let mut q = [T::zero(); 4];
    for j in 0..n {
        let e = aic_errors(j, belief, mdd, obs, goal, map);
        q[0] = q[0] + h * e.y * e.y / prec.sigma_y.get(j);
        q[1] = q[1] + h * e.y_prime * e.y_prime / prec.sigma_y_prime.get(j);
        q[2] = q[2] + h * e.mu * e.mu / prec.sigma_mu.get(j);
        q[3] = q[3] + h * e.mu_prime * e.mu_prime / prec.sigma_mu_prime.get(j);
    }
    let factors = [
        (Factor::SensorPosition, &prec.sigma_y),
        (Factor::SensorVelocity, &prec.sigma_y_prime),
        (Factor::GoalPrior, &prec.sigma_mu),
        (Factor::GoalPriorVelocity, &prec.sigma_mu_prime),
    ];
    let mut terms = Vec::with_capacity(8);
    for (i, (factor, sigma)) in factors.iter().enumerate() {
        terms.push((Term::Quadratic(*factor), q[i]));
        terms.push((Term::LogDet(*factor), h * sigma.ln_det(n)));
    }
    Ok(FreeEnergyReport::from_terms(terms))
}

/// Analytic gradient of [`free_energy_aic`] with respect to `(mu, mu', mu'')`.
pub fn grad_free_energy_aic<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    prec: &PrecisionSet<T>,
) -> Result<AicGradient<T>> {
    grad_free_energy_aic_mapped(belief, obs, goal, prec, &IdentitySensor)
}

pub fn grad_free_energy_aic_mapped<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    obs: &Observation<T>,
    goal: &GoalSpec<T>,
    prec: &PrecisionSet<T>,
    map: &impl SensorMap<T>,
) -> Result<AicGradient<T>> {
    let n = check_aic_inputs(belief, obs, goal, prec)?;
    let mdd = belief.require_double_prime()?;
    let a = goal.tau_inv;
    let mut g = AicGradient {
        d_mu: Vec::with_capacity(n),
        d_mu_prime: Vec::with_capacity(n),
        d_mu_double_prime: Vec::with_capacity(n),
    };
    for j in 0..n {
        let e = aic_errors(j, belief, mdd, obs, goal, map);
        let jac = map.jacobian(j, belief.mu[j], belief.mu_prime[j]);
        let wy = e.y / prec.sigma_y.get(j);
        let wyp = e.y_prime / prec.sigma_y_prime.get(j);
        let wm = e.mu / prec.sigma_mu.get(j);
        let wmp = e.mu_prime / prec.sigma_mu_prime.get(j);
        // eps_mu = mu' - (mu_g - mu) a, eps_mu' = mu'' - (mu_g' - mu') a
        g.d_mu.push(-wy * jac[0][0] - wyp * jac[1][0] + a * wm);
        g.d_mu_prime
            .push(-wy * jac[0][1] - wyp * jac[1][1] + wm + a * wmp);
        g.d_mu_double_prime.push(wmp);
    }
    Ok(g)
}

/// Everything the u-AIC free energy depends on besides the belief.
#[derive(Clone, Copy)]
pub struct UaicInputs<'a, T> {
    pub obs: &'a Observation<T>,
    pub prediction: &'a StatePrediction<T>,
    pub goal: &'a GoalSpec<T>,
    pub prior: ControlPrior<'a, T>,
    pub prec: &'a PrecisionSet<T>,
    pub extensions: &'a ExtensionConfig<T>,
    /// Previously executed action (smoothing prior mean).
    pub u_prev: &'a [T],
    /// Include the dependence of the action priors' means on `mu_x` in the
    /// state gradient.
    pub couple_state: bool,
}

fn check_uaic_inputs<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    inp: &UaicInputs<'_, T>,
) -> Result<usize> {
    belief.validate()?;
    belief.require_action()?;
    let n = belief.n_joints();
    inp.obs.validate(n)?;
    inp.goal.validate(n)?;
    inp.prec.validate(n)?;
    if inp.prediction.position.len() != n || inp.prediction.velocity.len() != n {
        return Err(contract("prediction dimension mismatch"));
    }
    if inp.prior.integral.len() != n || inp.u_prev.len() != n {
        return Err(contract("integral accumulator or u_prev dimension mismatch"));
    }
    inp.prior.gains.kp.check_len("kp", n)?;
    inp.prior.gains.ki.check_len("ki", n)?;
    inp.prior.gains.kd.check_len("kd", n)?;
    Ok(n)
}

/// u-AIC free energy: sensors, state prediction, control prior and any enabled
/// action priors.
pub fn free_energy_uaic<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    inp: &UaicInputs<'_, T>,
) -> Result<FreeEnergyReport<T>> {
    free_energy_uaic_mapped(belief, inp, &IdentitySensor)
}

pub fn free_energy_uaic_mapped<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    inp: &UaicInputs<'_, T>,
    map: &impl SensorMap<T>,
) -> Result<FreeEnergyReport<T>> {
    let n = check_uaic_inputs(belief, inp)?;
    let ext = inp.extensions.resolve(inp.prec)?;
    let prec = inp.prec;
    let mu_u = belief.require_action()?;
    let h = half::<T>();
    let z = T::zero();
    let (mut qy, mut qyp, mut qx, mut qxp, mut qu) = (z, z, z, z, z);
    let (mut qol, mut qcc, mut qp) = (z, z, z);
    for j in 0..n {
        let (mu, mp) = (belief.mu[j], belief.mu_prime[j]);
        let (gy, gyp) = map.predict(j, mu, mp);
        let ey = inp.obs.y[j] - gy;
        let eyp = inp.obs.y_prime[j] - gyp;
        let ex = mu - inp.prediction.position[j];
        let exp = mp - inp.prediction.velocity[j];
        let eu = mu_u[j] - f_star_joint(j, mu, mp, inp.goal, inp.prior.integral[j], inp.prior.gains);
        qy = qy + h * ey * ey / prec.sigma_y.get(j);
        qyp = qyp + h * eyp * eyp / prec.sigma_y_prime.get(j);
        qx = qx + h * ex * ex / prec.sigma_x.get(j);
        qxp = qxp + h * exp * exp / prec.sigma_x.get(j);
        qu = qu + h * eu * eu / prec.sigma_u.get(j);
        if let (Some(law), Some(s)) = (&inp.extensions.open_loop, ext.sigma_ol) {
            let e = mu_u[j] - law.value(j, mu, mp);
            qol = qol + h * e * e / s.get(j);
        }
        if let Some(s) = ext.sigma_cc {
            qcc = qcc + h * mu_u[j] * mu_u[j] / s.get(j);
        }
        if let Some(s) = ext.sigma_p {
            let e = mu_u[j] - inp.u_prev[j];
            qp = qp + h * e * e / s.get(j);
        }
    }
    let mut terms = vec![
        (Term::Quadratic(Factor::SensorPosition), qy),
        (Term::LogDet(Factor::SensorPosition), h * prec.sigma_y.ln_det(n)),
        (Term::Quadratic(Factor::SensorVelocity), qyp),
        (Term::LogDet(Factor::SensorVelocity), h * prec.sigma_y_prime.ln_det(n)),
        (Term::Quadratic(Factor::PredictionPosition), qx),
        (Term::LogDet(Factor::PredictionPosition), h * prec.sigma_x.ln_det(n)),
        (Term::Quadratic(Factor::PredictionVelocity), qxp),
        (Term::LogDet(Factor::PredictionVelocity), h * prec.sigma_x.ln_det(n)),
        (Term::Quadratic(Factor::ControlPrior), qu),
        (Term::LogDet(Factor::ControlPrior), h * prec.sigma_u.ln_det(n)),
    ];
    for (factor, q, sigma) in [
        (Factor::FeedForward, qol, ext.sigma_ol),
        (Factor::ControlCost, qcc, ext.sigma_cc),
        (Factor::Smoothing, qp, ext.sigma_p),
    ] {
        if let Some(s) = sigma {
            terms.push((Term::Quadratic(factor), q));
            terms.push((Term::LogDet(factor), h * s.ln_det(n)));
        }
    }
    Ok(FreeEnergyReport::from_terms(terms))
}

/// Analytic gradient of [`free_energy_uaic`] with respect to `(mu, mu', mu_u)`.
///
/// Without extensions the action component is `(mu_u - f*) / sigma_u`.
pub fn grad_free_energy_uaic<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    inp: &UaicInputs<'_, T>,
) -> Result<UaicGradient<T>> {
    grad_free_energy_uaic_mapped(belief, inp, &IdentitySensor)
}

pub fn grad_free_energy_uaic_mapped<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    inp: &UaicInputs<'_, T>,
    map: &impl SensorMap<T>,
) -> Result<UaicGradient<T>> {
    let n = check_uaic_inputs(belief, inp)?;
    let ext = inp.extensions.resolve(inp.prec)?;
    let prec = inp.prec;
    let gains = inp.prior.gains;
    let mu_u = belief.require_action()?;
    let mut g = UaicGradient {
        d_mu: Vec::with_capacity(n),
        d_mu_prime: Vec::with_capacity(n),
        d_mu_u: Vec::with_capacity(n),
    };
    for j in 0..n {
        let (mu, mp) = (belief.mu[j], belief.mu_prime[j]);
        let (gy, gyp) = map.predict(j, mu, mp);
        let jac = map.jacobian(j, mu, mp);
        let wy = (inp.obs.y[j] - gy) / prec.sigma_y.get(j);
        let wyp = (inp.obs.y_prime[j] - gyp) / prec.sigma_y_prime.get(j);
        let wx = (mu - inp.prediction.position[j]) / prec.sigma_x.get(j);
        let wxp = (mp - inp.prediction.velocity[j]) / prec.sigma_x.get(j);
        let wu = (mu_u[j] - f_star_joint(j, mu, mp, inp.goal, inp.prior.integral[j], gains))
            / prec.sigma_u.get(j);

        let mut d_mu = -wy * jac[0][0] - wyp * jac[1][0] + wx;
        let mut d_mp = -wy * jac[0][1] - wyp * jac[1][1] + wxp;
        let mut d_u = wu;
        if inp.couple_state {
            // d f*/d mu = -kp, d f*/d mu' = -kd
            d_mu = d_mu + wu * gains.kp.get(j);
            d_mp = d_mp + wu * gains.kd.get(j);
        }
        if let (Some(law), Some(s)) = (&inp.extensions.open_loop, ext.sigma_ol) {
            let w = (mu_u[j] - law.value(j, mu, mp)) / s.get(j);
            d_u = d_u + w;
            if inp.couple_state {
                let (dp, dv) = law.partials(j, mu, mp);
                d_mu = d_mu - w * dp;
                d_mp = d_mp - w * dv;
            }
        }
        if let Some(s) = ext.sigma_cc {
            d_u = d_u + mu_u[j] / s.get(j);
        }
        if let Some(s) = ext.sigma_p {
            d_u = d_u + (mu_u[j] - inp.u_prev[j]) / s.get(j);
        }
        g.d_mu.push(d_mu);
        g.d_mu_prime.push(d_mp);
        g.d_mu_u.push(d_u);
    }
    Ok(g)
}
