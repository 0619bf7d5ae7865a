use crate::harness::episode::TrajectoryRecord;

/// Settling band as a fraction of the commanded step.
pub const SETTLING_BAND: f64 = 0.02;
/// Trailing fraction of the episode over which the steady-state error is averaged.
pub const STEADY_STATE_WINDOW: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct TrialMetrics {
    /// Mean `|q - reference|` over the final tenth of the episode (rad).
    pub e_ss: f64,
    /// Time after release until every joint enters and stays within the band
    /// (s); `None` when some joint never settles.
    pub t_s: Option<f64>,
    /// Largest post-release excursion past the goal in the step direction, as
    /// a percentage of the step; the maximum over joints.
    pub os: f64,
    /// RMSE between belief and true position over all ticks and joints (rad).
    pub rmse_belief: f64,
    /// Largest `|u|` while the plant is blocked.
    pub windup_peak: f64,
    /// RMSE between true position and reference over all ticks and joints (rad).
    pub tracking_rmse: f64,
    /// Mean over ticks of `sum_j (u_k - u_{k-1})^2`, with `u_{-1} = 0`.
    pub control_increment_ms: f64,
}

fn rms(sum_sq: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        (sum_sq / count as f64).sqrt()
    }
}

/// Computes the episode metrics from its record. For a sinusoid reference the
/// error is measured against the moving reference and the band and overshoot
/// are relative to the amplitude, with overshoot taken on `|q - r|`.
pub fn compute_metrics(record: &TrajectoryRecord) -> TrialMetrics {
    let ticks = &record.ticks;
    let scenario = &record.scenario;
    if ticks.is_empty() {
        return TrialMetrics {
            e_ss: 0.0,
            t_s: None,
            os: 0.0,
            rmse_belief: 0.0,
            windup_peak: 0.0,
            tracking_rmse: 0.0,
            control_increment_ms: 0.0,
        };
    }
    let n = ticks[0].q.len();
    let len = ticks.len();

    let window = ((len as f64 * STEADY_STATE_WINDOW).ceil() as usize).clamp(1, len);
    let tail = &ticks[len - window..];
    let e_ss = tail
        .iter()
        .flat_map(|r| r.q.iter().zip(&r.reference).map(|(q, g)| (q - g).abs()))
        .sum::<f64>()
        / (window * n) as f64;

    let (mut belief_sq, mut track_sq) = (0.0, 0.0);
    for r in ticks {
        for j in 0..n {
            belief_sq += (r.mu[j] - r.q[j]).powi(2);
            track_sq += (r.q[j] - r.reference[j]).powi(2);
        }
    }

    let windup_peak = ticks
        .iter()
        .filter(|r| r.blocked)
        .flat_map(|r| r.u.iter().map(|u| u.abs()))
        .fold(0.0, f64::max);

    // The plant input before the first tick is zero.
    let mut prev = vec![0.0; n];
    let mut increments = 0.0;
    for r in ticks {
        increments += r.u.iter().zip(&prev).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        prev.clone_from(&r.u);
    }
    let control_increment_ms = increments / len as f64;

    let release = scenario.release_time();
    let first = ticks.partition_point(|r| r.t < release);
    let post = &ticks[first..];
    let step = scenario.reference.step(&scenario.plant.q0);
    let tracking = matches!(scenario.reference, crate::harness::Reference::Sinusoid { .. });

    let mut os: f64 = 0.0;
    let mut t_s = Some(0.0_f64);
    for (j, &s) in step.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let excursion = |r: &crate::harness::TickRecord| {
            let e = r.q[j] - r.reference[j];
            if tracking {
                e.abs()
            } else {
                e * s.signum()
            }
        };
        let peak = post.iter().map(excursion).fold(0.0, f64::max);
        os = os.max(100.0 * peak / s.abs());

        let band = SETTLING_BAND * s.abs();
        t_s = match (t_s, post.iter().rposition(|r| (r.q[j] - r.reference[j]).abs() > band)) {
            (None, _) => None,
            _ if post.is_empty() => None,
            (Some(acc), None) => Some(acc.max(post[0].t - release)),
            (Some(acc), Some(k)) if k + 1 < post.len() => Some(acc.max(post[k + 1].t - release)),
            (Some(_), Some(_)) => None,
        };
    }

    TrialMetrics {
        e_ss,
        t_s: t_s.map(|v| v.max(0.0)),
        os,
        rmse_belief: rms(belief_sq, len * n),
        windup_peak,
        tracking_rmse: rms(track_sq, len * n),
        control_increment_ms,
    }
}
