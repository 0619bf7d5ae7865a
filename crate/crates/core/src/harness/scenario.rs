use std::f64::consts::TAU;

use crate::aic::AicConfig;
use crate::error::{config, Result};
use crate::model::{GoalSpec, PrecisionSet};
use crate::pi::PiConfig;
use crate::plants::{ArmModel, CollisionScript, MsdParams};
use crate::uaic::UaicConfig;

#[derive(Clone, Debug, PartialEq)]
pub enum PlantModel {
    /// One-dimensional mass-spring-damper driven by the action as a force.
    Msd(MsdParams<f64>),
    Arm(ArmModel<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantSpec {
    pub model: PlantModel,
    pub q0: Vec<f64>,
    pub q_dot0: Vec<f64>,
}

impl PlantSpec {
    pub fn n_joints(&self) -> usize {
        self.q0.len()
    }
}

#[derive(Clone, Debug)]
pub enum ControllerSpec {
    Aic {
        cfg: AicConfig<f64>,
        prec: PrecisionSet<f64>,
        tau_inv: f64,
        /// Run the estimator only and apply no action.
        estimation_only: bool,
    },
    Uaic(UaicConfig<f64>),
    Pi(PiConfig<f64>),
}

impl ControllerSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ControllerSpec::Aic { .. } => "aic",
            ControllerSpec::Uaic(_) => "uaic",
            ControllerSpec::Pi(_) => "pi",
        }
    }

    fn dt(&self) -> f64 {
        match self {
            ControllerSpec::Aic { cfg, .. } => cfg.dt,
            ControllerSpec::Uaic(cfg) => cfg.dt,
            ControllerSpec::Pi(cfg) => cfg.dt,
        }
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        match self {
            ControllerSpec::Aic { cfg, prec, tau_inv, .. } => {
                cfg.validate()?;
                prec.validate(n)?;
                if !(*tau_inv >= 0.0 && tau_inv.is_finite()) {
                    return Err(config("tau_inv must be finite and >= 0"));
                }
                Ok(())
            }
            ControllerSpec::Uaic(cfg) => cfg.validate(n),
            ControllerSpec::Pi(cfg) => cfg.validate(),
        }
    }
}

/// Joint-space target: a fixed goal or a sinusoid `offset + A sin(2 pi f t + phase)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    Constant {
        mu_g: Vec<f64>,
    },
    Sinusoid {
        offset: Vec<f64>,
        amplitude: Vec<f64>,
        /// Hz.
        frequency: Vec<f64>,
        phase: Vec<f64>,
    },
}

impl Reference {
    pub fn n_joints(&self) -> usize {
        match self {
            Reference::Constant { mu_g } => mu_g.len(),
            Reference::Sinusoid { offset, .. } => offset.len(),
        }
    }

    /// Position and velocity of the reference at time `t`.
    pub fn at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Reference::Constant { mu_g } => (mu_g.clone(), vec![0.0; mu_g.len()]),
            Reference::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => (0..offset.len())
                .map(|j| {
                    let w = TAU * frequency[j];
                    let arg = w * t + phase[j];
                    (offset[j] + amplitude[j] * arg.sin(), amplitude[j] * w * arg.cos())
                })
                .unzip(),
        }
    }

    pub fn goal(&self, t: f64, tau_inv: f64) -> GoalSpec<f64> {
        let (mu_g, mu_g_prime) = self.at(t);
        GoalSpec {
            mu_g,
            mu_g_prime,
            tau_inv,
        }
    }

    /// Signed size of the commanded move per joint, against which overshoot
    /// and the settling band are measured: `mu_g - q0` for a fixed goal, the
    /// amplitude for a sinusoid.
    pub fn step(&self, q0: &[f64]) -> Vec<f64> {
        match self {
            Reference::Constant { mu_g } => mu_g.iter().zip(q0).map(|(g, q)| g - q).collect(),
            Reference::Sinusoid { amplitude, .. } => amplitude.clone(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let ok = match self {
            Reference::Constant { mu_g } => mu_g.len() == n && mu_g.iter().all(|v| v.is_finite()),
            Reference::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => [offset, amplitude, frequency, phase]
                .iter()
                .all(|v| v.len() == n && v.iter().all(|x| x.is_finite())),
        };
        if ok {
            Ok(())
        } else {
            Err(config(format!("reference must give {n} finite values per field")))
        }
    }
}

/// Everything needed to reproduce one episode.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantSpec,
    pub noise_std_pos: f64,
    pub noise_std_vel: f64,
    pub controller: ControllerSpec,
    pub reference: Reference,
    pub collision: Option<CollisionScript<f64>>,
    /// Seconds.
    pub episode_length: f64,
    /// Plant and controller step; the two run synchronously.
    pub dt: f64,
    /// Sensor noise seed.
    pub seed: u64,
}

impl Scenario {
    pub fn n_joints(&self) -> usize {
        self.plant.n_joints()
    }

    pub fn n_ticks(&self) -> usize {
        (self.episode_length / self.dt).round() as usize
    }

    /// Time at which the commanded move can complete: the end of the collision,
    /// or zero without one.
    pub fn release_time(&self) -> f64 {
        self.collision.as_ref().map_or(0.0, |c| c.end())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_joints();
        if n == 0 || self.plant.q_dot0.len() != n {
            return Err(config("plant q0 and q_dot0 must be non-empty and equal length"));
        }
        if matches!(self.plant.model, PlantModel::Msd(_)) && n != 1 {
            return Err(config("mass-spring-damper plant has exactly one joint"));
        }
        if matches!(self.plant.model, PlantModel::Arm(ArmModel::TwoLink(_))) && n != 2 {
            return Err(config("two-link arm has exactly two joints"));
        }
        if self.plant.q0.iter().chain(&self.plant.q_dot0).any(|v| !v.is_finite()) {
            return Err(config("plant initial state must be finite"));
        }
        if !(self.episode_length > 0.0 && self.episode_length.is_finite()) {
            return Err(config("episode_length must be > 0"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || self.n_ticks() == 0 {
            return Err(config("dt must be > 0 and no longer than the episode"));
        }
        if !(self.noise_std_pos >= 0.0 && self.noise_std_vel >= 0.0) {
            return Err(config("sensor noise std must be >= 0"));
        }
        self.reference.validate(n)?;
        self.controller.validate(n)?;
        if self.controller.dt() != self.dt {
            return Err(config("controller dt must equal the scenario dt"));
        }
        if let Some(c) = &self.collision {
            c.validate().map_err(|e| config(e.to_string()))?;
            if c.hold_positions.as_ref().is_some_and(|h| h.len() != n) {
                return Err(config("collision hold_positions length must match joints"));
            }
        }
        Ok(())
    }
}
