//! Active inference controllers for joint-space robot control: the standard
//! AIC, the unbiased AIC (u-AIC) with a PID-based control prior, simulated
//! plants, and an experiment harness.
//!
//! The controller math is generic over [`Scalar`] (`f32` or `f64`); the
//! harness and configuration layer work in `f64`.

pub mod aic;
pub mod config;
pub mod error;
pub mod harness;
pub mod model;
pub mod output;
pub mod pi;
pub mod plants;
pub mod scalar;
pub mod uaic;

pub use aic::{aic_control_step, aic_estimate_step, aic_tick, precision_learning_step, AicConfig, AicState};
pub use config::{RunConfig, SweepParam};
pub use error::{Error, Result};
pub use model::*;
pub use pi::{pi_step, PiConfig};
pub use plants::{
    apply_collision, arm_step, msd_step, rk4_step, ArmModel, CollisionScript, MsdParams, PlantState, SensorModel,
    Sensors, TwoLinkParams,
};
pub use scalar::Scalar;
pub use uaic::{
    predict_state, uaic_control_step, uaic_estimate_step, uaic_tick, EulerPredictor, StatePredictor, UaicConfig,
    UaicState,
};

pub type BeliefF64 = GaussianBeliefState<f64>;
pub type BeliefF32 = GaussianBeliefState<f32>;
pub type PrecisionSetF64 = PrecisionSet<f64>;
pub type PrecisionSetF32 = PrecisionSet<f32>;
pub type AicStateF64 = AicState<f64>;
pub type AicStateF32 = AicState<f32>;
pub type UaicStateF64 = UaicState<f64>;
pub type UaicStateF32 = UaicState<f32>;
pub type AicConfigF64 = AicConfig<f64>;
pub type AicConfigF32 = AicConfig<f32>;
pub type UaicConfigF64 = UaicConfig<f64>;
pub type UaicConfigF32 = UaicConfig<f32>;
