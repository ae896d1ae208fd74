//! CSV output.
//!
//! Real numbers are written with six significant digits in the style of C's
//! `%g`: fixed notation for exponents in `[-4, 6)`, scientific otherwise,
//! trailing zeros removed.

use std::fs;
use std::io::{self, Write};
use std::path::Path as FsPath;

use crate::experiment::{SummaryRow, SweepRow};
use crate::sim::report::SessionRecord;

pub const SWEEP_HEADER: [&str; 12] = [
    "scheme",
    "swept_param",
    "swept_value",
    "seed",
    "time_avg_total_worth",
    "mean_connection_worth",
    "mean_link_utilization",
    "offered",
    "accepted",
    "rejected",
    "preempted",
    "completed",
];

pub const SESSIONS_HEADER: [&str; 9] = [
    "flow_id",
    "profile_id",
    "path_id",
    "arrival_s",
    "end_s",
    "end_reason",
    "volume_mbit",
    "worth_integral",
    "avg_connection_worth",
];

pub const SUMMARY_HEADER: [&str; 12] = [
    "scheme",
    "swept_param",
    "swept_value",
    "replications",
    "time_avg_total_worth_mean",
    "time_avg_total_worth_sd",
    "mean_connection_worth_mean",
    "mean_connection_worth_sd",
    "mean_link_utilization_mean",
    "mean_link_utilization_sd",
    "rejected_mean",
    "preempted_mean",
];

/// Formats `x` like `printf("%.6g", x)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_owned()
        } else if x > 0.0 {
            "inf".to_owned()
        } else {
            "-inf".to_owned()
        };
    }
    // Round to six significant digits first; the exponent of the rounded
    // value decides the notation.
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_owned()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn to_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn finish<W: Write>(w: csv::Writer<W>) -> io::Result<W> {
    w.into_inner().map_err(|e| e.into_error())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> io::Result<W> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(to_io)?;
    for r in rows {
        let c = &r.counts;
        w.write_record([
            r.scheme.as_str().to_owned(),
            r.param.to_owned(),
            sig6(r.value),
            r.seed.to_string(),
            sig6(r.time_avg_total_worth),
            sig6(r.mean_connection_worth),
            sig6(r.mean_link_utilization),
            c.offered.to_string(),
            c.accepted.to_string(),
            c.rejected.to_string(),
            c.preempted.to_string(),
            c.completed.to_string(),
        ])
        .map_err(to_io)?;
    }
    finish(w)
}

pub fn write_sessions_csv<W: Write>(out: W, sessions: &[SessionRecord]) -> io::Result<W> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SESSIONS_HEADER).map_err(to_io)?;
    for s in sessions {
        w.write_record([
            s.flow_id.to_string(),
            s.profile_id.to_string(),
            s.path_id.map(|p| p.0.to_string()).unwrap_or_default(),
            sig6(s.arrival_s),
            sig6(s.end_s),
            s.end_reason.as_str().to_owned(),
            sig6(s.volume_mbit),
            sig6(s.worth_integral),
            sig6(s.avg_connection_worth()),
        ])
        .map_err(to_io)?;
    }
    finish(w)
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> io::Result<W> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(to_io)?;
    for r in rows {
        w.write_record([
            r.scheme.as_str().to_owned(),
            r.param.to_owned(),
            sig6(r.value),
            r.replications.to_string(),
            sig6(r.time_avg_total_worth.mean),
            sig6(r.time_avg_total_worth.sd),
            sig6(r.mean_connection_worth.mean),
            sig6(r.mean_connection_worth.sd),
            sig6(r.mean_link_utilization.mean),
            sig6(r.mean_link_utilization.sd),
            sig6(r.rejected_mean),
            sig6(r.preempted_mean),
        ])
        .map_err(to_io)?;
    }
    finish(w)
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &FsPath, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)
}
