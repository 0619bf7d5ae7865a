//! The u-AIC control prior `p(u | x)` with PID mean `f*`, and the optional
//! priors on the action (feed-forward, control cost, smoothing).

use std::fmt;
use std::sync::Arc;

use crate::error::{config, Result};
use crate::model::types::{GaussianBeliefState, GoalSpec, PerJoint, PrecisionSet};
use crate::scalar::Scalar;

/// PID gains of the desired-action function `f*`.
#[derive(Clone, Debug, PartialEq)]
pub struct PidGains<T> {
    pub kp: PerJoint<T>,
    pub ki: PerJoint<T>,
    pub kd: PerJoint<T>,
}

impl<T: Scalar> PidGains<T> {
    pub fn new(kp: T, ki: T, kd: T) -> Self {
        Self {
            kp: kp.into(),
            ki: ki.into(),
            kd: kd.into(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.kp
            .check_non_negative("kp", n)
            .and(self.ki.check_non_negative("ki", n))
            .and(self.kd.check_non_negative("kd", n))
            .map_err(|e| config(e.to_string()))
    }
}

/// `f* = Kp (mu_g - mu) + Ki * integral + Kd (mu_g' - mu')`, elementwise.
pub fn f_star<T: Scalar>(
    belief: &GaussianBeliefState<T>,
    goal: &GoalSpec<T>,
    integral_accumulator: &[T],
    gains: &PidGains<T>,
) -> Vec<T> {
    (0..belief.n_joints())
        .map(|j| {
            f_star_joint(
                j,
                belief.mu[j],
                belief.mu_prime[j],
                goal,
                integral_accumulator[j],
                gains,
            )
        })
        .collect()
}

#[inline]
pub(crate) fn f_star_joint<T: Scalar>(
    j: usize,
    mu: T,
    mu_prime: T,
    goal: &GoalSpec<T>,
    integral: T,
    gains: &PidGains<T>,
) -> T {
    gains.kp.get(j) * (goal.mu_g[j] - mu)
        + gains.ki.get(j) * integral
        + gains.kd.get(j) * (goal.mu_g_prime[j] - mu_prime)
}

/// Mean of the control prior: gains plus the integral state it is evaluated with.
#[derive(Clone, Copy, Debug)]
pub struct ControlPrior<'a, T> {
    pub gains: &'a PidGains<T>,
    pub integral: &'a [T],
}

/// Open-loop (feed-forward) law used as the mean of the feed-forward action prior.
/// It receives the state belief of one joint.
pub trait OpenLoopLaw<T: Scalar>: Send + Sync {
    fn value(&self, joint: usize, mu: T, mu_prime: T) -> T;

    /// `(d f_ol / d mu, d f_ol / d mu')`.
    fn partials(&self, _joint: usize, _mu: T, _mu_prime: T) -> (T, T) {
        (T::zero(), T::zero())
    }
}

/// Constant feed-forward action per joint.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantFeedForward<T>(pub PerJoint<T>);

impl<T: Scalar> OpenLoopLaw<T> for ConstantFeedForward<T> {
    fn value(&self, joint: usize, _mu: T, _mu_prime: T) -> T {
        self.0.get(joint)
    }
}

/// `f_ol = offset + position_gain * mu + velocity_gain * mu'`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFeedForward<T> {
    pub offset: PerJoint<T>,
    pub position_gain: PerJoint<T>,
    pub velocity_gain: PerJoint<T>,
}

impl<T: Scalar> OpenLoopLaw<T> for AffineFeedForward<T> {
    fn value(&self, joint: usize, mu: T, mu_prime: T) -> T {
        self.offset.get(joint)
            + self.position_gain.get(joint) * mu
            + self.velocity_gain.get(joint) * mu_prime
    }

    fn partials(&self, joint: usize, _mu: T, _mu_prime: T) -> (T, T) {
        (self.position_gain.get(joint), self.velocity_gain.get(joint))
    }
}

/// Which extra priors on the action are active. Their variances live in
/// [`PrecisionSet`] (`sigma_ol`, `sigma_cc`, `sigma_p`).
#[derive(Clone, Default)]
pub struct ExtensionConfig<T> {
    pub open_loop: Option<Arc<dyn OpenLoopLaw<T>>>,
    pub control_cost: bool,
    pub smoothing: bool,
}

impl<T> fmt::Debug for ExtensionConfig<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtensionConfig")
            .field("open_loop", &self.open_loop.is_some())
            .field("control_cost", &self.control_cost)
            .field("smoothing", &self.smoothing)
            .finish()
    }
}

impl<T: Scalar> ExtensionConfig<T> {
    pub fn none() -> Self {
        Self {
            open_loop: None,
            control_cost: false,
            smoothing: false,
        }
    }

    pub fn with_open_loop(mut self, law: impl OpenLoopLaw<T> + 'static) -> Self {
        self.open_loop = Some(Arc::new(law));
        self
    }

    pub fn with_control_cost(mut self) -> Self {
        self.control_cost = true;
        self
    }

    pub fn with_smoothing(mut self) -> Self {
        self.smoothing = true;
        self
    }

    /// Resolved variances of the enabled extensions, erroring when one is missing.
    pub(crate) fn resolve<'a>(
        &self,
        prec: &'a PrecisionSet<T>,
    ) -> Result<ResolvedExtensions<'a, T>> {
        fn need<'a, T>(
            on: bool,
            v: &'a Option<PerJoint<T>>,
            name: &str,
        ) -> Result<Option<&'a PerJoint<T>>> {
            match (on, v) {
                (false, _) => Ok(None),
                (true, Some(v)) => Ok(Some(v)),
                (true, None) => Err(config(format!("{name} extension enabled without {name} variance"))),
            }
        }
        Ok(ResolvedExtensions {
            sigma_ol: need(self.open_loop.is_some(), &prec.sigma_ol, "sigma_ol")?,
            sigma_cc: need(self.control_cost, &prec.sigma_cc, "sigma_cc")?,
            sigma_p: need(self.smoothing, &prec.sigma_p, "sigma_p")?,
        })
    }
}

pub(crate) struct ResolvedExtensions<'a, T> {
    pub sigma_ol: Option<&'a PerJoint<T>>,
    pub sigma_cc: Option<&'a PerJoint<T>>,
    pub sigma_p: Option<&'a PerJoint<T>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_star_zero_at_goal() {
        let b = GaussianBeliefState::uaic(vec![0.3_f64], vec![0.0], vec![0.0]);
        let g = GoalSpec::fixed(vec![0.3]);
        let u = f_star(&b, &g, &[0.0], &PidGains::new(3.0, 2.0, 1.0));
        assert_eq!(u, vec![0.0]);
    }

    #[test]
    fn f_star_single_term() {
        let b = GaussianBeliefState::uaic(vec![0.0_f64], vec![0.0], vec![0.0]);
        let g = GoalSpec::fixed(vec![0.5]);
        let u = f_star(&b, &g, &[7.0], &PidGains::new(1.0, 0.0, 0.0));
        assert_eq!(u, vec![0.5]);
    }

    #[test]
    fn missing_extension_variance_is_a_config_error() {
        let prec = PrecisionSet::uniform(1.0_f64);
        let ext = ExtensionConfig::none().with_control_cost();
        assert!(matches!(ext.resolve(&prec), Err(crate::Error::Config(_))));
        let ext = ExtensionConfig::none().with_open_loop(ConstantFeedForward(PerJoint::scalar(1.0)));
        assert!(ext.resolve(&prec).is_err());
    }

    #[test]
    fn negative_gain_rejected() {
        assert!(PidGains::new(-1.0_f64, 0.0, 0.0).validate(1).is_err());
    }
}
