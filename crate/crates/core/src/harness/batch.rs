use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{config, Error, Result};
use crate::harness::episode::{run_episode, Outcome, TrajectoryRecord};
use crate::harness::metrics::TrialMetrics;
use crate::harness::scenario::{ControllerSpec, Scenario};
use crate::plants::CollisionScript;

/// Sampling ranges for the per-trial blocking collision.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionRandomization {
    pub start: (f64, f64),
    pub duration: (f64, f64),
}

impl Default for CollisionRandomization {
    fn default() -> Self {
        Self {
            start: (0.0, 3.0),
            duration: (1.0, 3.0),
        }
    }
}

impl CollisionRandomization {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !ok(self.start) || !ok(self.duration) || self.duration.0 < 0.0 {
            return Err(config("collision ranges need finite lo <= hi and duration >= 0"));
        }
        Ok(())
    }

    /// Draws from stream 1 of the trial seed; sensor noise uses stream 0, so
    /// the collision never shifts the noise sequence.
    pub fn sample(&self, seed: u64) -> CollisionScript<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let start = rng.random_range(self.start.0..=self.start.1);
        let duration = rng.random_range(self.duration.0..=self.duration.1);
        CollisionScript::new(start, duration)
    }
}

/// Scenario for trial `k`: seed `base.seed + k` and, when randomizing, a
/// freshly drawn collision.
pub fn trial_scenario(base: &Scenario, k: usize, randomization: Option<&CollisionRandomization>) -> Scenario {
    let mut s = base.clone();
    s.seed = base.seed.wrapping_add(k as u64);
    if let Some(r) = randomization {
        s.collision = Some(r.sample(s.seed));
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub index: usize,
    pub seed: u64,
    pub collision: Option<CollisionScript<f64>>,
    pub metrics: Option<TrialMetrics>,
    pub divergence: Option<Error>,
}

impl TrialResult {
    pub fn from_outcome(index: usize, outcome: &Outcome) -> Self {
        let scenario = &outcome.record().scenario;
        let divergence = match outcome {
            Outcome::Diverged { error, .. } => Some(error.clone()),
            Outcome::Completed(_) => None,
        };
        Self {
            index,
            seed: scenario.seed,
            collision: scenario.collision.clone(),
            metrics: outcome.metrics().cloned(),
            divergence,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricStats {
    pub mean: f64,
    /// Sample standard deviation; zero for fewer than two values.
    pub std: f64,
    pub count: usize,
}

impl MetricStats {
    /// Sorts before summing so the result does not depend on trial order.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let count = values.len();
        if count == 0 {
            return Self { mean: f64::NAN, std: f64::NAN, count };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            let mut dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
            dev.sort_by(f64::total_cmp);
            (dev.iter().sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std, count }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchSummary {
    pub scenario: String,
    pub controller: String,
    pub seed_base: u64,
    pub n_trials: usize,
    /// Trials excluded from the statistics because they diverged.
    pub divergences: usize,
    /// Completed trials that never settled; `t_s` is averaged over the rest.
    pub not_settled: usize,
    pub e_ss: MetricStats,
    pub t_s: MetricStats,
    pub os: MetricStats,
    pub rmse_belief: MetricStats,
    pub windup_peak: MetricStats,
    pub tracking_rmse: MetricStats,
    pub control_increment_ms: MetricStats,
    /// Per-trial results, ordered by trial index.
    pub trials: Vec<TrialResult>,
}

impl BatchSummary {
    pub fn from_trials(scenario: &str, controller: &str, seed_base: u64, mut trials: Vec<TrialResult>) -> Self {
        trials.sort_by_key(|t| t.index);
        let done: Vec<&TrialMetrics> = trials.iter().filter_map(|t| t.metrics.as_ref()).collect();
        let col = |f: fn(&TrialMetrics) -> f64| MetricStats::from_values(done.iter().map(|m| f(m)).collect());
        Self {
            scenario: scenario.to_owned(),
            controller: controller.to_owned(),
            seed_base,
            n_trials: trials.len(),
            divergences: trials.iter().filter(|t| t.divergence.is_some()).count(),
            not_settled: done.iter().filter(|m| m.t_s.is_none()).count(),
            e_ss: col(|m| m.e_ss),
            t_s: MetricStats::from_values(done.iter().filter_map(|m| m.t_s).collect()),
            os: col(|m| m.os),
            rmse_belief: col(|m| m.rmse_belief),
            windup_peak: col(|m| m.windup_peak),
            tracking_rmse: col(|m| m.tracking_rmse),
            control_increment_ms: col(|m| m.control_increment_ms),
            trials,
        }
    }
}

/// Runs `n_trials` independent episodes in parallel.
pub fn run_batch(base: &Scenario, n_trials: usize, randomization: Option<&CollisionRandomization>) -> Result<BatchSummary> {
    if n_trials == 0 {
        return Err(config("n_trials must be >= 1"));
    }
    if let Some(r) = randomization {
        r.validate()?;
    }
    base.validate()?;
    let trials = (0..n_trials)
        .into_par_iter()
        .map(|k| run_episode(&trial_scenario(base, k, randomization)).map(|o| TrialResult::from_outcome(k, &o)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BatchSummary::from_trials(&base.name, base.controller.label(), base.seed, trials))
}

/// Runs the AIC scenario once per `tau_inv`, optionally with the action disabled.
pub fn tau_sweep(base: &Scenario, tau_invs: &[f64], estimation_only: bool) -> Result<Vec<(f64, TrajectoryRecord)>> {
    if !matches!(base.controller, ControllerSpec::Aic { .. }) {
        return Err(config("tau sweep needs an AIC scenario"));
    }
    tau_invs
        .iter()
        .map(|&v| {
            let mut s = base.clone();
            if let ControllerSpec::Aic { tau_inv, estimation_only: eo, .. } = &mut s.controller {
                *tau_inv = v;
                *eo = estimation_only;
            }
            match run_episode(&s)? {
                Outcome::Completed(e) => Ok((v, e.record)),
                Outcome::Diverged { error, .. } => Err(error),
            }
        })
        .collect()
}
