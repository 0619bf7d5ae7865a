use crate::aic::{aic_estimate_step, aic_tick, AicState};
use crate::error::{Error, Result};
use crate::harness::metrics::{compute_metrics, TrialMetrics};
use crate::harness::scenario::{ControllerSpec, PlantModel, Scenario};
use crate::model::Observation;
use crate::pi::pi_step;
use crate::plants::{apply_collision, arm_step, msd_step, PlantState, SensorModel, Sensors};
use crate::uaic::{uaic_tick, UaicState};

/// One row of the trajectory: plant, measurement, belief and action at time `t`.
/// `u` is the action computed from this tick's measurement and applied over
/// the following step.
#[derive(Clone, Debug, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    pub q: Vec<f64>,
    pub q_dot: Vec<f64>,
    pub y: Vec<f64>,
    pub y_prime: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu_prime: Vec<f64>,
    pub u: Vec<f64>,
    pub reference: Vec<f64>,
    pub blocked: bool,
    /// u-AIC integral accumulator.
    pub integral: Option<Vec<f64>>,
    /// AIC position sensor variance, when it is being learned.
    pub sigma_y: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    /// The scenario that produced this record; re-running it reproduces the record.
    pub scenario: Scenario,
    pub ticks: Vec<TickRecord>,
}

#[derive(Clone, Debug)]
pub struct Episode {
    pub record: TrajectoryRecord,
    pub metrics: TrialMetrics,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Completed(Episode),
    /// The episode stopped at the first non-finite value; the record holds the
    /// ticks up to that point.
    Diverged { record: TrajectoryRecord, error: Error },
}

impl Outcome {
    pub fn record(&self) -> &TrajectoryRecord {
        match self {
            Outcome::Completed(e) => &e.record,
            Outcome::Diverged { record, .. } => record,
        }
    }

    pub fn metrics(&self) -> Option<&TrialMetrics> {
        match self {
            Outcome::Completed(e) => Some(&e.metrics),
            Outcome::Diverged { .. } => None,
        }
    }

    pub fn into_episode(self) -> Result<Episode> {
        match self {
            Outcome::Completed(e) => Ok(e),
            Outcome::Diverged { error, .. } => Err(error),
        }
    }
}

enum Runtime {
    Aic(AicState<f64>),
    Uaic(UaicState<f64>),
    Pi(Vec<f64>),
}

impl Runtime {
    fn init(spec: &ControllerSpec, obs: &Observation<f64>, scenario: &Scenario) -> Self {
        match spec {
            ControllerSpec::Aic { prec, .. } => Runtime::Aic(AicState::from_observation(obs, prec.clone())),
            ControllerSpec::Uaic(cfg) => {
                let goal = scenario.reference.goal(obs.timestamp, 1.0);
                Runtime::Uaic(UaicState::at_prior(obs, &goal, &cfg.gains))
            }
            ControllerSpec::Pi(_) => Runtime::Pi(vec![0.0; obs.y.len()]),
        }
    }

    /// Advances the controller one tick and fills the belief and action fields.
    fn tick(self, spec: &ControllerSpec, obs: &Observation<f64>, scenario: &Scenario, row: &mut TickRecord) -> Result<Self> {
        let t = obs.timestamp;
        Ok(match (self, spec) {
            (Runtime::Aic(state), ControllerSpec::Aic { cfg, tau_inv, estimation_only, .. }) => {
                let goal = scenario.reference.goal(t, *tau_inv);
                let state = if *estimation_only {
                    aic_estimate_step(state, obs, &goal, cfg)?
                } else {
                    aic_tick(state, obs, &goal, cfg)?.0
                };
                row.mu.clone_from(&state.belief.mu);
                row.mu_prime.clone_from(&state.belief.mu_prime);
                row.u.clone_from(&state.u);
                if cfg.precision_learning {
                    row.sigma_y = Some((0..row.mu.len()).map(|j| state.prec.sigma_y.get(j)).collect());
                }
                Runtime::Aic(state)
            }
            (Runtime::Uaic(state), ControllerSpec::Uaic(cfg)) => {
                let goal = scenario.reference.goal(t, 1.0);
                let (state, u) = uaic_tick(state, obs, &goal, cfg)?;
                row.mu.clone_from(&state.belief.mu);
                row.mu_prime.clone_from(&state.belief.mu_prime);
                row.u = u;
                row.integral = Some(state.integral.clone());
                Runtime::Uaic(state)
            }
            (Runtime::Pi(mut u), ControllerSpec::Pi(cfg)) => {
                let goal = scenario.reference.goal(t, 1.0);
                pi_step(&mut u, obs, &goal, cfg);
                row.mu.clone_from(&obs.y);
                row.mu_prime.clone_from(&obs.y_prime);
                row.u.clone_from(&u);
                Runtime::Pi(u)
            }
            _ => unreachable!("runtime built from the same controller spec"),
        })
    }
}

fn step_plant(scenario: &Scenario, plant: &PlantState<f64>, u: &[f64]) -> Result<PlantState<f64>> {
    match &scenario.plant.model {
        PlantModel::Msd(p) => Ok(msd_step(plant, u[0], scenario.dt, p)),
        PlantModel::Arm(m) => arm_step(plant, u, scenario.dt, m),
    }
}

/// Steps plant and controller synchronously for the whole episode.
///
/// Per tick: collision script, measurement, controller, record, plant step.
/// Returns `Err` only for an invalid scenario; divergence is an [`Outcome`].
pub fn run_episode(scenario: &Scenario) -> Result<Outcome> {
    scenario.validate()?;
    let n = scenario.n_joints();
    let mut plant = PlantState::new(scenario.plant.q0.clone(), scenario.plant.q_dot0.clone());
    let mut sensors = Sensors::new(SensorModel {
        noise_std_pos: scenario.noise_std_pos,
        noise_std_vel: scenario.noise_std_vel,
        seed: scenario.seed,
    });
    let n_ticks = scenario.n_ticks();
    let mut ticks = Vec::with_capacity(n_ticks);
    let mut runtime: Option<Runtime> = None;
    for k in 0..n_ticks {
        plant.t = k as f64 * scenario.dt;
        if let Some(script) = &scenario.collision {
            plant = apply_collision(&plant, script);
        }
        let obs = sensors.sense(&plant);
        let mut row = TickRecord {
            t: plant.t,
            q: plant.q.clone(),
            q_dot: plant.q_dot.clone(),
            y: obs.y.clone(),
            y_prime: obs.y_prime.clone(),
            mu: Vec::new(),
            mu_prime: Vec::new(),
            u: Vec::new(),
            reference: scenario.reference.at(plant.t).0,
            blocked: plant.blocked.iter().any(|&b| b),
            integral: None,
            sigma_y: None,
        };
        let rt = runtime.take().unwrap_or_else(|| Runtime::init(&scenario.controller, &obs, scenario));
        let rt = match rt.tick(&scenario.controller, &obs, scenario, &mut row) {
            Ok(rt) => rt,
            Err(error) => return Ok(diverged(scenario, ticks, error)),
        };
        let next = step_plant(scenario, &plant, &row.u)?;
        ticks.push(row);
        if let Some(joint) = (0..n).find(|&j| !(next.q[j].is_finite() && next.q_dot[j].is_finite())) {
            let error = Error::Divergence {
                controller: "plant",
                joint,
                step: k as u64,
                time: plant.t,
            };
            return Ok(diverged(scenario, ticks, error));
        }
        plant = next;
        runtime = Some(rt);
    }
    let record = TrajectoryRecord {
        scenario: scenario.clone(),
        ticks,
    };
    let metrics = compute_metrics(&record);
    Ok(Outcome::Completed(Episode { record, metrics }))
}

fn diverged(scenario: &Scenario, ticks: Vec<TickRecord>, error: Error) -> Outcome {
    Outcome::Diverged {
        record: TrajectoryRecord {
            scenario: scenario.clone(),
            ticks,
        },
        error,
    }
}
