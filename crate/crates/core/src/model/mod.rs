//! Shared domain types, both free-energy functionals, their gradients and
//! closed-form stationary points.

mod control_prior;
mod fixed_point;
mod free_energy;
mod types;

pub use control_prior::{
    f_star, AffineFeedForward, ConstantFeedForward, ControlPrior, ExtensionConfig, OpenLoopLaw,
    PidGains,
};
pub use fixed_point::{aic_fixed_point, aic_flow_equilibrium, uaic_action_fixed_point, uaic_fixed_point};
pub use free_energy::{
    free_energy_aic, free_energy_aic_mapped, free_energy_uaic, free_energy_uaic_mapped,
    grad_free_energy_aic, grad_free_energy_aic_mapped, grad_free_energy_uaic,
    grad_free_energy_uaic_mapped, AicGradient, IdentitySensor, SensorMap, StatePrediction,
    UaicGradient, UaicInputs,
};
pub use types::{
    Factor, FreeEnergyReport, GaussianBeliefState, GoalSpec, Observation, PerJoint, PrecisionSet,
    Term, SIGMA_MIN,
};
