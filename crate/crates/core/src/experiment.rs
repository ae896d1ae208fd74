//! Parameter sweeps over schemes and seeds.

use rayon::prelude::*;

use crate::scenario::SweepSpec;
use crate::scheme::SchemeKind;
use crate::sim::engine::{run, SimError};
use crate::sim::report::{ProfileCounts, SimReport};

/// One simulation in a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub scheme: SchemeKind,
    pub param: &'static str,
    pub value: f64,
    pub seed: u64,
    pub time_avg_total_worth: f64,
    pub mean_connection_worth: f64,
    pub mean_link_utilization: f64,
    pub counts: ProfileCounts,
}

impl SweepRow {
    pub fn from_report(param: &'static str, value: f64, report: &SimReport) -> Self {
        SweepRow {
            scheme: report.scheme,
            param,
            value,
            seed: report.seed,
            time_avg_total_worth: report.time_avg_total_worth,
            mean_connection_worth: report.mean_connection_worth,
            mean_link_utilization: report.mean_link_utilization,
            counts: report.totals,
        }
    }
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for one sample).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Stat { mean: 0.0, sd: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let sd = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, sd }
    }
}

/// Replication statistics for one (scheme, value) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub scheme: SchemeKind,
    pub param: &'static str,
    pub value: f64,
    pub replications: usize,
    pub time_avg_total_worth: Stat,
    pub mean_connection_worth: Stat,
    pub mean_link_utilization: Stat,
    pub rejected_mean: f64,
    pub preempted_mean: f64,
}

/// Runs every (scheme, value, replication) combination in parallel. Rows come
/// back ordered by scheme, then value, then seed.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SimError> {
    spec.validate()?;
    let param = spec.param.as_str();
    let mut jobs = Vec::new();
    for &scheme in &spec.schemes {
        for &value in &spec.values {
            for r in 0..spec.replications {
                let mut config = spec.base.clone();
                spec.param.apply(&mut config, value);
                config.scheme = scheme;
                config.seed = spec.base.seed + u64::from(r);
                jobs.push((value, config));
            }
        }
    }
    jobs.par_iter()
        .map(|(value, config)| {
            run(config).map(|report| SweepRow::from_report(param, *value, &report))
        })
        .collect()
}

/// Groups consecutive rows with equal scheme and value.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = (rows[start].scheme, rows[start].value);
        let end = rows[start..]
            .iter()
            .position(|r| (r.scheme, r.value) != key)
            .map_or(rows.len(), |k| start + k);
        let cell = &rows[start..end];
        let pick = |f: fn(&SweepRow) -> f64| Stat::of(&cell.iter().map(f).collect::<Vec<_>>());
        out.push(SummaryRow {
            scheme: key.0,
            param: rows[start].param,
            value: key.1,
            replications: cell.len(),
            time_avg_total_worth: pick(|r| r.time_avg_total_worth),
            mean_connection_worth: pick(|r| r.mean_connection_worth),
            mean_link_utilization: pick(|r| r.mean_link_utilization),
            rejected_mean: pick(|r| r.counts.rejected as f64).mean,
            preempted_mean: pick(|r| r.counts.preempted as f64).mean,
        });
        start = end;
    }
    out
}
