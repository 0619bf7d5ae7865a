//! Scenarios, episode simulation, trial metrics and randomized batches.

mod batch;
mod episode;
mod metrics;
mod scenario;

pub use batch::{run_batch, tau_sweep, trial_scenario, BatchSummary, CollisionRandomization, MetricStats, TrialResult};
pub use episode::{run_episode, Episode, Outcome, TickRecord, TrajectoryRecord};
pub use metrics::{compute_metrics, TrialMetrics, SETTLING_BAND, STEADY_STATE_WINDOW};
pub use scenario::{ControllerSpec, PlantModel, PlantSpec, Reference, Scenario};
