use std::fmt;

use crate::error::{contract, Result};
use crate::scalar::{lit, Scalar};

/// Smallest admissible variance. Learned variances are clamped to it.
pub const SIGMA_MIN: f64 = 1e-6;

/// A per-joint parameter: either one value broadcast to every joint or one value per joint.
#[derive(Clone, Debug, PartialEq)]
pub struct PerJoint<T>(Vec<T>);

impl<T: Scalar> PerJoint<T> {
    pub fn scalar(value: T) -> Self {
        Self(vec![value])
    }

    pub fn per_joint(values: Vec<T>) -> Self {
        Self(values)
    }

    /// Value for joint `j`, broadcasting a scalar.
    #[inline]
    pub fn get(&self, j: usize) -> T {
        if self.0.len() == 1 {
            self.0[0]
        } else {
            self.0[j]
        }
    }

    #[inline]
    pub fn recip(&self, j: usize) -> T {
        self.get(j).recip()
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn is_broadcast(&self) -> bool {
        self.0.len() == 1
    }

    pub fn set(&mut self, j: usize, value: T) {
        if self.0.len() == 1 {
            self.0[0] = value;
        } else {
            self.0[j] = value;
        }
    }

    /// Expands a broadcast value into `n` explicit entries.
    pub fn expand(&mut self, n: usize) {
        if self.0.len() == 1 && n > 1 {
            let v = self.0[0];
            self.0 = vec![v; n];
        }
    }

    /// Sum of `ln` over the `n` diagonal entries: `ln |diag|`.
    pub fn ln_det(&self, n: usize) -> T {
        (0..n).fold(T::zero(), |acc, j| acc + self.get(j).ln())
    }

    pub(crate) fn check_len(&self, name: &str, n: usize) -> Result<()> {
        if self.0.is_empty() || (self.0.len() != 1 && self.0.len() != n) {
            return Err(contract(format!(
                "{name} has {} entries, expected 1 or {n}",
                self.0.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_variance(&self, name: &str, n: usize) -> Result<()> {
        self.check_len(name, n)?;
        let floor = lit::<T>(SIGMA_MIN);
        for &v in &self.0 {
            if !v.is_finite() || v < floor {
                return Err(contract(format!(
                    "{name} = {v} must be finite and >= {SIGMA_MIN}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn check_non_negative(&self, name: &str, n: usize) -> Result<()> {
        self.check_len(name, n)?;
        if self.0.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(contract(format!("{name} must be finite and >= 0")));
        }
        Ok(())
    }
}

impl<T: Scalar> From<T> for PerJoint<T> {
    fn from(value: T) -> Self {
        Self::scalar(value)
    }
}

/// The agent's Gaussian belief: means of position, velocity and optionally
/// acceleration, plus the action belief used by the unbiased controller.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBeliefState<T> {
    pub mu: Vec<T>,
    pub mu_prime: Vec<T>,
    pub mu_double_prime: Option<Vec<T>>,
    pub mu_u: Option<Vec<T>>,
}

impl<T: Scalar> GaussianBeliefState<T> {
    /// Belief for the generalized-motion controller (position, velocity, acceleration).
    pub fn aic(mu: Vec<T>, mu_prime: Vec<T>) -> Self {
        let n = mu.len();
        Self {
            mu,
            mu_prime,
            mu_double_prime: Some(vec![T::zero(); n]),
            mu_u: None,
        }
    }

    /// Belief for the unbiased controller (state and action).
    pub fn uaic(mu: Vec<T>, mu_prime: Vec<T>, mu_u: Vec<T>) -> Self {
        Self {
            mu,
            mu_prime,
            mu_double_prime: None,
            mu_u: Some(mu_u),
        }
    }

    pub fn n_joints(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mu.len();
        if n == 0 {
            return Err(contract("belief has zero joints"));
        }
        let check = |name: &str, v: &[T]| -> Result<()> {
            if v.len() != n {
                return Err(contract(format!("{name} has {} entries, expected {n}", v.len())));
            }
            if let Some(j) = v.iter().position(|x| !x.is_finite()) {
                return Err(contract(format!("{name}[{j}] is not finite")));
            }
            Ok(())
        };
        check("mu", &self.mu)?;
        check("mu_prime", &self.mu_prime)?;
        if let Some(v) = &self.mu_double_prime {
            check("mu_double_prime", v)?;
        }
        if let Some(v) = &self.mu_u {
            check("mu_u", v)?;
        }
        Ok(())
    }

    pub(crate) fn require_double_prime(&self) -> Result<&[T]> {
        self.mu_double_prime
            .as_deref()
            .ok_or_else(|| contract("belief carries no acceleration order (mu_double_prime)"))
    }

    pub(crate) fn require_action(&self) -> Result<&[T]> {
        self.mu_u
            .as_deref()
            .ok_or_else(|| contract("belief carries no action belief (mu_u)"))
    }
}

/// Variances of every factor of both generative models. All diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionSet<T> {
    /// Position sensor variance.
    pub sigma_y: PerJoint<T>,
    /// Velocity sensor variance.
    pub sigma_y_prime: PerJoint<T>,
    /// Goal prior on the velocity belief (AIC).
    pub sigma_mu: PerJoint<T>,
    /// Goal prior on the acceleration belief (AIC).
    pub sigma_mu_prime: PerJoint<T>,
    /// State prediction variance, shared by position and velocity (u-AIC).
    pub sigma_x: PerJoint<T>,
    /// Control prior `p(u | x)` variance (u-AIC).
    pub sigma_u: PerJoint<T>,
    pub sigma_ol: Option<PerJoint<T>>,
    pub sigma_cc: Option<PerJoint<T>>,
    pub sigma_p: Option<PerJoint<T>>,
}

impl<T: Scalar> PrecisionSet<T> {
    /// Every mandatory variance set to `v`, no extension variances.
    pub fn uniform(v: T) -> Self {
        Self {
            sigma_y: v.into(),
            sigma_y_prime: v.into(),
            sigma_mu: v.into(),
            sigma_mu_prime: v.into(),
            sigma_x: v.into(),
            sigma_u: v.into(),
            sigma_ol: None,
            sigma_cc: None,
            sigma_p: None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.sigma_y.check_variance("sigma_y", n)?;
        self.sigma_y_prime.check_variance("sigma_y_prime", n)?;
        self.sigma_mu.check_variance("sigma_mu", n)?;
        self.sigma_mu_prime.check_variance("sigma_mu_prime", n)?;
        self.sigma_x.check_variance("sigma_x", n)?;
        self.sigma_u.check_variance("sigma_u", n)?;
        for (name, v) in [
            ("sigma_ol", &self.sigma_ol),
            ("sigma_cc", &self.sigma_cc),
            ("sigma_p", &self.sigma_p),
        ] {
            if let Some(v) = v {
                v.check_variance(name, n)?;
            }
        }
        Ok(())
    }
}

/// Target the belief (AIC) or the control prior (u-AIC) is attracted to.
#[derive(Clone, Debug, PartialEq)]
pub struct GoalSpec<T> {
    pub mu_g: Vec<T>,
    pub mu_g_prime: Vec<T>,
    /// Goal attraction rate `1/tau`. Zero turns the AIC prior into a pure estimator.
    pub tau_inv: T,
}

impl<T: Scalar> GoalSpec<T> {
    /// Constant set-point with zero goal velocity and unit time constant.
    pub fn fixed(mu_g: Vec<T>) -> Self {
        let n = mu_g.len();
        Self {
            mu_g,
            mu_g_prime: vec![T::zero(); n],
            tau_inv: T::one(),
        }
    }

    pub fn with_tau_inv(mut self, tau_inv: T) -> Self {
        self.tau_inv = tau_inv;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.mu_g.len() != n || self.mu_g_prime.len() != n {
            return Err(contract(format!("goal dimension does not match {n} joints")));
        }
        if !self.tau_inv.is_finite() || self.tau_inv < T::zero() {
            return Err(contract("tau_inv must be finite and >= 0"));
        }
        if self.mu_g.iter().chain(&self.mu_g_prime).any(|v| !v.is_finite()) {
            return Err(contract("goal contains non-finite entries"));
        }
        Ok(())
    }
}

/// One noisy position/velocity sensor sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation<T> {
    pub y: Vec<T>,
    pub y_prime: Vec<T>,
    pub timestamp: f64,
}

impl<T: Scalar> Observation<T> {
    pub fn new(y: Vec<T>, y_prime: Vec<T>, timestamp: f64) -> Self {
        Self {
            y,
            y_prime,
            timestamp,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.y.len() != n || self.y_prime.len() != n {
            return Err(contract(format!(
                "observation has {}/{} entries, expected {n}",
                self.y.len(),
                self.y_prime.len()
            )));
        }
        if let Some(j) = self
            .y
            .iter()
            .chain(&self.y_prime)
            .position(|v| !v.is_finite())
        {
            return Err(contract(format!("observation entry {j} is not finite")));
        }
        Ok(())
    }
}

/// Factor of the generative model a free-energy term belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// `p(y | mu)`
    SensorPosition,
    /// `p(y' | mu')`
    SensorVelocity,
    /// `p(mu' | mu)`, the AIC goal prior
    GoalPrior,
    /// `p(mu'' | mu')`
    GoalPriorVelocity,
    /// `p(x)` around the prediction, positions (u-AIC)
    PredictionPosition,
    /// `p(x)` around the prediction, velocities (u-AIC)
    PredictionVelocity,
    /// `p(u | x)` with mean `f*`
    ControlPrior,
    FeedForward,
    ControlCost,
    Smoothing,
}

/// Label of one entry of a [`FreeEnergyReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// `1/2 eps^T Sigma^-1 eps`
    Quadratic(Factor),
    /// `1/2 ln |Sigma|`
    LogDet(Factor),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Factor::SensorPosition => "y",
            Factor::SensorVelocity => "y'",
            Factor::GoalPrior => "mu",
            Factor::GoalPriorVelocity => "mu'",
            Factor::PredictionPosition => "x",
            Factor::PredictionVelocity => "x'",
            Factor::ControlPrior => "u",
            Factor::FeedForward => "ol",
            Factor::ControlCost => "cc",
            Factor::Smoothing => "p",
        };
        f.write_str(s)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Quadratic(x) => write!(f, "quad[{x}]"),
            Term::LogDet(x) => write!(f, "logdet[{x}]"),
        }
    }
}

/// Free energy value with its decomposition. `value` is the sum of `per_term`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeEnergyReport<T> {
    pub value: T,
    pub per_term: Vec<(Term, T)>,
}

impl<T: Scalar> FreeEnergyReport<T> {
    pub(crate) fn from_terms(per_term: Vec<(Term, T)>) -> Self {
        let value = per_term.iter().fold(T::zero(), |acc, (_, v)| acc + *v);
        Self { value, per_term }
    }

    pub fn term(&self, term: Term) -> Option<T> {
        self.per_term
            .iter()
            .find(|(t, _)| *t == term)
            .map(|(_, v)| *v)
    }

    /// Sum of the quadratic (prediction error) entries only.
    pub fn quadratic_part(&self) -> T {
        self.per_term
            .iter()
            .filter(|(t, _)| matches!(t, Term::Quadratic(_)))
            .fold(T::zero(), |acc, (_, v)| acc + *v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_joint_broadcasts() {
        let p = PerJoint::scalar(2.0_f64);
        assert_eq!(p.get(0), 2.0);
        assert_eq!(p.get(5), 2.0);
        assert!((p.ln_det(3) - 3.0 * 2.0_f64.ln()).abs() < 1e-15);
        let q = PerJoint::per_joint(vec![1.0, 3.0]);
        assert_eq!(q.get(1), 3.0);
        assert!(q.check_len("q", 3).is_err());
    }

    #[test]
    fn variance_floor_is_enforced() {
        let mut p = PrecisionSet::uniform(1.0_f64);
        assert!(p.validate(2).is_ok());
        p.sigma_y = PerJoint::scalar(-1.0);
        assert!(p.validate(2).is_err());
        p.sigma_y = PerJoint::scalar(1e-7);
        assert!(p.validate(2).is_err());
        p.sigma_y = PerJoint::scalar(1e-6);
        assert!(p.validate(2).is_ok());
        p.sigma_p = Some(PerJoint::scalar(0.0));
        assert!(p.validate(2).is_err());
    }

    #[test]
    fn belief_validation_catches_shape_and_nan() {
        let b = GaussianBeliefState::aic(vec![0.0_f64, 1.0], vec![0.0]);
        assert!(b.validate().is_err());
        let mut b = GaussianBeliefState::aic(vec![0.0_f64, 1.0], vec![0.0, 0.0]);
        assert!(b.validate().is_ok());
        b.mu[1] = f64::NAN;
        assert!(b.validate().is_err());
    }

    #[test]
    fn goal_rejects_negative_tau_inv() {
        let g = GoalSpec::fixed(vec![0.0_f64]).with_tau_inv(-1.0);
        assert!(g.validate(1).is_err());
        assert!(GoalSpec::fixed(vec![0.0_f64]).with_tau_inv(0.0).validate(1).is_ok());
    }
}
