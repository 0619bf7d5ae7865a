//! Discrete PI baseline: the limit of the AIC control law when the beliefs sit
//! on the goal.

use crate::error::{config, Result};
use crate::model::{GoalSpec, Observation};
use crate::scalar::{clamp_abs, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct PiConfig<T> {
    /// Gain on the velocity error.
    pub kp: T,
    /// Gain on the position error (integrated).
    pub ki: T,
    pub dt: T,
    pub u_saturation: T,
}

impl<T: Scalar> PiConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp >= T::zero() && self.ki >= T::zero() && self.dt > T::zero() && self.u_saturation > T::zero()) {
            return Err(config("PI baseline requires kp, ki >= 0 and dt, u_saturation > 0"));
        }
        Ok(())
    }
}

/// `u <- clamp(u - dt [ki (y - mu_g) + kp (y' - mu_g')])`.
///
/// Written in velocity form, so the velocity gain acts proportionally on
/// position and the position gain integrally.
pub fn pi_step<T: Scalar>(u: &mut [T], obs: &Observation<T>, goal: &GoalSpec<T>, cfg: &PiConfig<T>) {
    for (j, uj) in u.iter_mut().enumerate() {
        let drive = cfg.ki * (obs.y[j] - goal.mu_g[j]) + cfg.kp * (obs.y_prime[j] - goal.mu_g_prime[j]);
        *uj = clamp_abs(*uj - cfg.dt * drive, cfg.u_saturation);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn at_goal_the_action_holds() {
        let cfg = PiConfig { kp: 1.0, ki: 2.0, dt: 1e-3, u_saturation: 3.0 };
        let mut u = vec![0.5];
        pi_step(&mut u, &Observation::new(vec![1.0], vec![0.0], 0.0), &GoalSpec::fixed(vec![1.0]), &cfg);
        assert_eq!(u, vec![0.5]);
    }
}
