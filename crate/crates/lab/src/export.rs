use std::fmt::Write as _;

use gtl_core::dynamics::{IntegratorStats, Trajectory};
use serde::Serialize;

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// `t,<state fields>,<monitors>` with one row per accepted step.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::new();
    let fields = tr.states[0].field_names();
    let mut header = vec!["t".to_string()];
    header.extend(fields);
    header.extend(tr.series.iter().map(|(n, _)| n.clone()));
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, (t, s)) in tr.times.iter().zip(&tr.states).enumerate() {
        let mut row = vec![fmt_f64(*t)];
        row.extend(s.to_vec().into_iter().map(fmt_f64));
        row.extend(tr.series.iter().map(|(_, v)| fmt_f64(v[i])));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[derive(Serialize)]
struct StatsDoc<'a> {
    flow: &'a str,
    method: String,
    t_end: f64,
    samples: usize,
    integrator_stats: StatsFields,
    /// `max_t |x(t) - x(0)|` per monitor; `null` when undefined.
    drift: Vec<(String, Option<f64>)>,
}

#[derive(Serialize)]
struct StatsFields {
    steps: usize,
    rejections: usize,
    rhs_evals: usize,
}

impl From<IntegratorStats> for StatsFields {
    fn from(s: IntegratorStats) -> Self {
        Self { steps: s.steps, rejections: s.rejections, rhs_evals: s.rhs_evals }
    }
}

/// Drift of every monitor, NaN where the monitor is absent along the run.
pub fn drifts(tr: &Trajectory) -> Vec<(String, f64)> {
    tr.series.iter().map(|(n, _)| (n.clone(), tr.drift(n).unwrap_or(f64::NAN))).collect()
}

pub fn stats_json(tr: &Trajectory, method: &str) -> String {
    let doc = StatsDoc {
        flow: tr.flow.name(),
        method: method.to_string(),
        t_end: *tr.times.last().unwrap_or(&0.0),
        samples: tr.times.len(),
        integrator_stats: tr.stats.into(),
        drift: drifts(tr).into_iter().map(|(n, d)| (n, d.is_finite().then_some(d))).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("stats serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use gtl_core::dynamics::{integrate, FlowId, IntegratorConfig, Monitors, RhsOptions};
    use gtl_core::model::N3State;
    use gtl_core::State;

    #[test]
    fn header_and_rows() {
        let s = State::N3(N3State::new([1.0, 2.0, 3.0], [0.0, 0.0], 0.0));
        let tr = integrate(&s, FlowId::N3, &RhsOptions::default(), &IntegratorConfig::rk4_fixed(0.5, 1.0), Monitors::default())
            .unwrap();
        let csv = trajectory_csv(&tr);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,p1,p2,p3,a1,a2,u,H1,H2,H3,C1,C2,C3,lam1,lam2,lam3");
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
        assert!(rows[0].contains("NaN"));
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }
}
