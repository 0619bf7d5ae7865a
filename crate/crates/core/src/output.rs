//! CSV writers for trajectories, per-episode metrics, batch summaries and
//! sweep results. Every file starts with a header naming columns and units;
//! numbers carry 17 significant digits so values read back bit-exactly.

use std::io::Write;

use crate::harness::{BatchSummary, TrajectoryRecord, TrialMetrics};

/// Formats with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn settle(t_s: Option<f64>) -> String {
    t_s.map_or_else(|| "not_settled".to_owned(), num)
}

pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t [s]".to_owned()];
    for (name, unit) in [
        ("q", "rad"),
        ("qdot", "rad/s"),
        ("y", "rad"),
        ("yprime", "rad/s"),
        ("mu", "rad"),
        ("muprime", "rad/s"),
        ("u", "N m"),
    ] {
        h.extend((1..=n).map(|j| format!("{name}_{j} [{unit}]")));
    }
    h
}

/// One row per tick: `t, q_1..q_n, qdot_1..n, y_1..n, yprime_1..n, mu_1..n, muprime_1..n, u_1..n`.
pub fn write_trajectory<W: Write>(w: W, record: &TrajectoryRecord) -> std::io::Result<()> {
    let n = record.scenario.n_joints();
    let mut out = csv::Writer::from_writer(w);
    out.write_record(trajectory_header(n))?;
    for r in &record.ticks {
        let mut row = vec![num(r.t)];
        for v in [&r.q, &r.q_dot, &r.y, &r.y_prime, &r.mu, &r.mu_prime, &r.u] {
            row.extend(v.iter().map(|&x| num(x)));
        }
        out.write_record(&row)?;
    }
    out.flush()
}

pub const METRICS_HEADER: [&str; 9] = [
    "scenario",
    "controller",
    "e_ss [rad]",
    "t_s [s]",
    "os [%]",
    "RMSE [rad]",
    "windup_peak [N m]",
    "tracking_rmse [rad]",
    "control_increment_ms [(N m)^2]",
];

fn metrics_row(scenario: &str, controller: &str, m: &TrialMetrics) -> Vec<String> {
    vec![
        scenario.to_owned(),
        controller.to_owned(),
        num(m.e_ss),
        settle(m.t_s),
        num(m.os),
        num(m.rmse_belief),
        num(m.windup_peak),
        num(m.tracking_rmse),
        num(m.control_increment_ms),
    ]
}

pub fn write_metrics<W: Write>(w: W, scenario: &str, controller: &str, m: &TrialMetrics) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(METRICS_HEADER)?;
    out.write_record(metrics_row(scenario, controller, m))?;
    out.flush()
}

pub const SUMMARY_HEADER: [&str; 5] = ["scenario", "e_ss [rad]", "t_s [s]", "os [%]", "RMSE [rad]"];

/// Batch means in the layout `scenario, e_ss, t_s, os, RMSE`.
pub fn write_summary<W: Write>(w: W, summaries: &[BatchSummary]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        out.write_record([
            s.scenario.clone(),
            num(s.e_ss.mean),
            num(s.t_s.mean),
            num(s.os.mean),
            num(s.rmse_belief.mean),
        ])?;
    }
    out.flush()
}

/// Means, standard deviations and trial counts for every metric.
pub fn write_summary_detail<W: Write>(w: W, summaries: &[BatchSummary]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["scenario", "controller", "seed_base", "trials", "diverged", "not_settled"]
        .map(String::from)
        .to_vec();
    for m in METRICS_HEADER.iter().skip(2) {
        header.push(format!("{m} mean"));
        header.push(format!("{m} std"));
    }
    out.write_record(&header)?;
    for s in summaries {
        let mut row = vec![
            s.scenario.clone(),
            s.controller.clone(),
            s.seed_base.to_string(),
            s.n_trials.to_string(),
            s.divergences.to_string(),
            s.not_settled.to_string(),
        ];
        for st in [
            s.e_ss,
            s.t_s,
            s.os,
            s.rmse_belief,
            s.windup_peak,
            s.tracking_rmse,
            s.control_increment_ms,
        ] {
            row.push(num(st.mean));
            row.push(num(st.std));
        }
        out.write_record(&row)?;
    }
    out.flush()
}

/// One sweep result row: the swept value, the scenario and its metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub scenario: String,
    pub controller: String,
    /// `None` when the run diverged.
    pub metrics: Option<TrialMetrics>,
}

/// Long format: one row per (value, scenario).
pub fn write_sweep<W: Write>(w: W, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["parameter".to_owned(), "value".to_owned(), "status".to_owned()];
    header.extend(METRICS_HEADER.iter().map(|s| s.to_string()));
    out.write_record(&header)?;
    for r in rows {
        let mut row = vec![r.parameter.clone(), num(r.value)];
        match &r.metrics {
            Some(m) => {
                row.push("ok".to_owned());
                row.extend(metrics_row(&r.scenario, &r.controller, m));
            }
            None => {
                row.push("diverged".to_owned());
                row.push(r.scenario.clone());
                row.push(r.controller.clone());
                row.extend(std::iter::repeat_n(String::new(), METRICS_HEADER.len() - 2));
            }
        }
        out.write_record(&row)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_exactly() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, f64::MAX] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn trajectory_header_layout() {
        let h = trajectory_header(2);
        assert_eq!(h.len(), 15);
        assert_eq!(h[0], "t [s]");
        assert_eq!(h[1], "q_1 [rad]");
        assert_eq!(h[3], "qdot_1 [rad/s]");
        assert_eq!(h[14], "u_2 [N m]");
    }
}
