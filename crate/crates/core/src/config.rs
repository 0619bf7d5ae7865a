//! Declarative run configuration (TOML). Unknown keys are rejected, and a
//! config validates into its full scenario set before anything is simulated.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::aic::AicConfig;
use crate::error::{config, Error, Result};
use crate::harness::{CollisionRandomization, ControllerSpec, PlantModel, PlantSpec, Reference, Scenario};
use crate::model::{AffineFeedForward, ExtensionConfig, PerJoint, PidGains, PrecisionSet};
use crate::pi::PiConfig;
use crate::plants::{ArmModel, CollisionScript, MsdParams, TwoLinkParams};
use crate::uaic::UaicConfig;

/// A scalar broadcast to every joint, or one value per joint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(f64),
    Many(Vec<f64>),
}

impl Values {
    fn per_joint(&self) -> PerJoint<f64> {
        match self {
            Values::One(v) => PerJoint::scalar(*v),
            Values::Many(v) => PerJoint::per_joint(v.clone()),
        }
    }

    fn expand(&self, n: usize, key: &str) -> Result<Vec<f64>> {
        match self {
            Values::One(v) => Ok(vec![*v; n]),
            Values::Many(v) if v.len() == n => Ok(v.clone()),
            Values::Many(v) => Err(config(format!("`{key}` has {} entries, expected {n}", v.len()))),
        }
    }
}

impl From<f64> for Values {
    fn from(v: f64) -> Self {
        Values::One(v)
    }
}

fn one() -> Values {
    Values::One(1.0)
}
fn zero() -> Values {
    Values::One(0.0)
}
fn unit() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn infinite() -> f64 {
    f64::INFINITY
}
fn default_damping() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantConfig {
    /// Damped double integrator per joint.
    Arm {
        #[serde(default = "default_damping")]
        damping: f64,
        q0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q_dot0: Option<Vec<f64>>,
    },
    /// Planar two-link arm; unset parameters take the nominal defaults.
    TwoLink {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<TwoLinkConfig>,
        q0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q_dot0: Option<Vec<f64>>,
    },
    Msd {
        #[serde(default = "unit")]
        k1: f64,
        #[serde(default = "msd_k2")]
        k2: f64,
        #[serde(default = "unit")]
        mass: f64,
        q0: f64,
        #[serde(default)]
        q_dot0: f64,
    },
}

fn msd_k2() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLinkConfig {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub lc1: f64,
    pub lc2: f64,
    pub i1: f64,
    pub i2: f64,
    pub damping: f64,
    pub gravity: f64,
}

impl Default for TwoLinkConfig {
    fn default() -> Self {
        let p = TwoLinkParams::<f64>::default();
        Self {
            m1: p.m1,
            m2: p.m2,
            l1: p.l1,
            lc1: p.lc1,
            lc2: p.lc2,
            i1: p.i1,
            i2: p.i2,
            damping: p.damping,
            gravity: p.gravity,
        }
    }
}

impl PlantConfig {
    fn spec(&self) -> Result<PlantSpec> {
        let init = |q0: &Vec<f64>, qd: &Option<Vec<f64>>| (q0.clone(), qd.clone().unwrap_or_else(|| vec![0.0; q0.len()]));
        Ok(match self {
            PlantConfig::Arm { damping, q0, q_dot0 } => {
                if !(*damping >= 0.0) {
                    return Err(config("plant damping must be >= 0"));
                }
                let (q0, q_dot0) = init(q0, q_dot0);
                PlantSpec {
                    model: PlantModel::Arm(ArmModel::DoubleIntegrator { damping: *damping }),
                    q0,
                    q_dot0,
                }
            }
            PlantConfig::TwoLink { params, q0, q_dot0 } => {
                let c = params.clone().unwrap_or_default();
                let p = TwoLinkParams {
                    m1: c.m1,
                    m2: c.m2,
                    l1: c.l1,
                    lc1: c.lc1,
                    lc2: c.lc2,
                    i1: c.i1,
                    i2: c.i2,
                    damping: c.damping,
                    gravity: c.gravity,
                };
                if [p.m1, p.m2, p.l1, p.i1, p.i2].iter().any(|v| !(*v > 0.0)) || !(p.damping >= 0.0) {
                    return Err(config("two-link masses, lengths and inertias must be > 0, damping >= 0"));
                }
                let (q0, q_dot0) = init(q0, q_dot0);
                PlantSpec {
                    model: PlantModel::Arm(ArmModel::TwoLink(p)),
                    q0,
                    q_dot0,
                }
            }
            PlantConfig::Msd { k1, k2, mass, q0, q_dot0 } => {
                if !(*mass > 0.0 && *k1 >= 0.0 && *k2 >= 0.0) {
                    return Err(config("mass-spring-damper needs mass > 0 and k1, k2 >= 0"));
                }
                PlantSpec {
                    model: PlantModel::Msd(MsdParams {
                        k1: *k1,
                        k2: *k2,
                        mass: *mass,
                    }),
                    q0: vec![*q0],
                    q_dot0: vec![*q_dot0],
                }
            }
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    #[serde(default)]
    pub noise_std_pos: f64,
    #[serde(default)]
    pub noise_std_vel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GoalConfig {
    Constant {
        mu_g: Values,
    },
    Sinusoid {
        #[serde(default = "zero")]
        offset: Values,
        amplitude: Values,
        /// Hz.
        frequency: Values,
        #[serde(default = "zero")]
        phase: Values,
    },
}

impl GoalConfig {
    fn reference(&self, n: usize) -> Result<Reference> {
        Ok(match self {
            GoalConfig::Constant { mu_g } => Reference::Constant {
                mu_g: mu_g.expand(n, "goal.mu_g")?,
            },
            GoalConfig::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => Reference::Sinusoid {
                offset: offset.expand(n, "goal.offset")?,
                amplitude: amplitude.expand(n, "goal.amplitude")?,
                frequency: frequency.expand(n, "goal.frequency")?,
                phase: phase.expand(n, "goal.phase")?,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionConfig {
    pub start: f64,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_positions: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub trials: usize,
    /// Draw a fresh collision per trial instead of using `[collision]`.
    #[serde(default = "yes")]
    pub randomize_collision: bool,
    #[serde(default = "start_range")]
    pub start_range: [f64; 2],
    #[serde(default = "duration_range")]
    pub duration_range: [f64; 2],
}

fn start_range() -> [f64; 2] {
    [0.0, 3.0]
}
fn duration_range() -> [f64; 2] {
    [1.0, 3.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AicSection {
    pub kappa_mu: f64,
    pub kappa_a: f64,
    pub u_saturation: f64,
    #[serde(default = "unit")]
    pub tau_inv: f64,
    #[serde(default = "one")]
    pub sigma_y: Values,
    #[serde(default = "one")]
    pub sigma_y_prime: Values,
    #[serde(default = "one")]
    pub sigma_mu: Values,
    #[serde(default = "one")]
    pub sigma_mu_prime: Values,
    #[serde(default)]
    pub precision_learning: bool,
    #[serde(default)]
    pub kappa_sigma: f64,
    #[serde(default)]
    pub learn_velocity_precision: bool,
    #[serde(default)]
    pub estimation_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedForwardConfig {
    pub offset: Values,
    #[serde(default = "zero")]
    pub position_gain: Values,
    #[serde(default = "zero")]
    pub velocity_gain: Values,
    /// Variance of the feed-forward prior.
    pub sigma: Values,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UaicSection {
    pub kappa_mu: f64,
    pub kappa_u: f64,
    pub kp: Values,
    pub ki: Values,
    pub kd: Values,
    #[serde(default = "infinite")]
    pub integral_limit: f64,
    #[serde(default = "infinite")]
    pub u_saturation: f64,
    #[serde(default = "one")]
    pub sigma_y: Values,
    #[serde(default = "one")]
    pub sigma_y_prime: Values,
    #[serde(default = "one")]
    pub sigma_x: Values,
    #[serde(default = "one")]
    pub sigma_u: Values,
    #[serde(default = "yes")]
    pub couple_state: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_forward: Option<FeedForwardConfig>,
    /// Variance of the zero-mean control-cost prior; absent disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_cc: Option<Values>,
    /// Variance of the smoothing prior on the last action; absent disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_p: Option<Values>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiSection {
    pub kp: f64,
    pub ki: f64,
    pub u_saturation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Aic,
    Uaic,
    Pi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub name: String,
    pub controller: ControllerKind,
    /// Apply the `[collision]` section to this scenario.
    #[serde(default = "yes")]
    pub collision: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dt: f64,
    pub episode_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub plant: PlantConfig,
    #[serde(default)]
    pub sensors: SensorConfig,
    pub goal: GoalConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision: Option<CollisionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<BatchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aic: Option<AicSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uaic: Option<UaicSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<PiSection>,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<ScenarioEntry>,
}

/// Parameters a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    /// AIC goal-prior rate.
    TauInv,
    /// u-AIC smoothing variance; infinity disables the prior.
    SigmaP,
    /// Position and velocity sensor noise std.
    NoiseStd,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::TauInv => "tau_inv",
            SweepParam::SigmaP => "sigma_p",
            SweepParam::NoiseStd => "noise_std",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau_inv" => Ok(SweepParam::TauInv),
            "sigma_p" => Ok(SweepParam::SigmaP),
            "noise_std" => Ok(SweepParam::NoiseStd),
            other => Err(config(format!(
                "unknown sweep parameter `{other}` (expected tau_inv, sigma_p or noise_std)"
            ))),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config(e.to_string()))
    }

    pub fn n_joints(&self) -> usize {
        match &self.plant {
            PlantConfig::Arm { q0, .. } | PlantConfig::TwoLink { q0, .. } => q0.len(),
            PlantConfig::Msd { .. } => 1,
        }
    }

    /// Collision sampling for batches, or `None` to keep the configured collision.
    pub fn randomization(&self) -> Option<CollisionRandomization> {
        self.batch.as_ref().filter(|b| b.randomize_collision).map(|b| CollisionRandomization {
            start: (b.start_range[0], b.start_range[1]),
            duration: (b.duration_range[0], b.duration_range[1]),
        })
    }

    pub fn trials(&self) -> usize {
        self.batch.as_ref().map_or(1, |b| b.trials)
    }

    fn controller(&self, kind: ControllerKind, n: usize) -> Result<ControllerSpec> {
        let missing = |name: &str| config(format!("scenario uses `{name}` but the [{name}] section is missing"));
        Ok(match kind {
            ControllerKind::Aic => {
                let a = self.aic.as_ref().ok_or_else(|| missing("aic"))?;
                let mut cfg = AicConfig::new(a.kappa_mu, a.kappa_a, self.dt, a.u_saturation);
                cfg.precision_learning = a.precision_learning;
                cfg.kappa_sigma = a.kappa_sigma;
                cfg.learn_velocity_precision = a.learn_velocity_precision;
                let mut prec = PrecisionSet::uniform(1.0);
                prec.sigma_y = a.sigma_y.per_joint();
                prec.sigma_y_prime = a.sigma_y_prime.per_joint();
                prec.sigma_mu = a.sigma_mu.per_joint();
                prec.sigma_mu_prime = a.sigma_mu_prime.per_joint();
                ControllerSpec::Aic {
                    cfg,
                    prec,
                    tau_inv: a.tau_inv,
                    estimation_only: a.estimation_only,
                }
            }
            ControllerKind::Uaic => {
                let u = self.uaic.as_ref().ok_or_else(|| missing("uaic"))?;
                let mut prec = PrecisionSet::uniform(1.0);
                prec.sigma_y = u.sigma_y.per_joint();
                prec.sigma_y_prime = u.sigma_y_prime.per_joint();
                prec.sigma_x = u.sigma_x.per_joint();
                prec.sigma_u = u.sigma_u.per_joint();
                let gains = PidGains {
                    kp: u.kp.per_joint(),
                    ki: u.ki.per_joint(),
                    kd: u.kd.per_joint(),
                };
                let mut ext = ExtensionConfig::none();
                if let Some(ff) = &u.feed_forward {
                    prec.sigma_ol = Some(ff.sigma.per_joint());
                    ext.open_loop = Some(Arc::new(AffineFeedForward {
                        offset: ff.offset.per_joint(),
                        position_gain: ff.position_gain.per_joint(),
                        velocity_gain: ff.velocity_gain.per_joint(),
                    }));
                    for v in [&ff.offset, &ff.position_gain, &ff.velocity_gain] {
                        v.expand(n, "uaic.feed_forward")?;
                    }
                }
                if let Some(s) = &u.sigma_cc {
                    prec.sigma_cc = Some(s.per_joint());
                    ext.control_cost = true;
                }
                if let Some(s) = &u.sigma_p {
                    prec.sigma_p = Some(s.per_joint());
                    ext.smoothing = true;
                }
                let mut cfg = UaicConfig::new(u.kappa_mu, u.kappa_u, self.dt, gains, prec);
                cfg.integral_limit = u.integral_limit;
                cfg.u_saturation = u.u_saturation;
                cfg.extensions = ext;
                cfg.couple_state = u.couple_state;
                ControllerSpec::Uaic(cfg)
            }
            ControllerKind::Pi => {
                let p = self.pi.as_ref().ok_or_else(|| missing("pi"))?;
                ControllerSpec::Pi(PiConfig {
                    kp: p.kp,
                    ki: p.ki,
                    dt: self.dt,
                    u_saturation: p.u_saturation,
                })
            }
        })
    }

    /// Builds and validates every declared scenario.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        if self.scenarios.is_empty() {
            return Err(config("at least one [[scenario]] is required"));
        }
        if let Some(b) = &self.batch {
            if b.trials == 0 {
                return Err(config("batch.trials must be >= 1"));
            }
        }
        if let Some(r) = self.randomization() {
            r.validate()?;
        }
        let plant = self.plant.spec()?;
        let n = plant.n_joints();
        let reference = self.goal.reference(n)?;
        let mut names = std::collections::BTreeSet::new();
        self.scenarios
            .iter()
            .map(|entry| {
                if entry.name.is_empty() || !names.insert(entry.name.as_str()) {
                    return Err(config(format!("scenario names must be unique and non-empty: `{}`", entry.name)));
                }
                let collision = match (&self.collision, entry.collision) {
                    (Some(c), true) => Some(CollisionScript {
                        start: c.start,
                        duration: c.duration,
                        hold_positions: c.hold_positions.clone(),
                    }),
                    _ => None,
                };
                let scenario = Scenario {
                    name: entry.name.clone(),
                    plant: plant.clone(),
                    noise_std_pos: self.sensors.noise_std_pos,
                    noise_std_vel: self.sensors.noise_std_vel,
                    controller: self.controller(entry.controller, n)?,
                    reference: reference.clone(),
                    collision,
                    episode_length: self.episode_length,
                    dt: self.dt,
                    seed: self.seed,
                };
                scenario
                    .validate()
                    .map_err(|e| config(format!("scenario `{}`: {}", entry.name, e)))?;
                Ok(scenario)
            })
            .collect()
    }

    /// A copy with one sweep parameter set to `value`.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<RunConfig> {
        let mut c = self.clone();
        match param {
            SweepParam::TauInv => {
                c.aic.as_mut().ok_or_else(|| config("tau_inv sweep needs an [aic] section"))?.tau_inv = value;
            }
            SweepParam::SigmaP => {
                let u = c.uaic.as_mut().ok_or_else(|| config("sigma_p sweep needs a [uaic] section"))?;
                u.sigma_p = (!value.is_infinite()).then_some(Values::One(value));
            }
            SweepParam::NoiseStd => {
                c.sensors.noise_std_pos = value;
                c.sensors.noise_std_vel = value;
            }
        }
        Ok(c)
    }
}
