//! Flow-level, event-driven simulation.
//!
//! Sessions arrive as independent Poisson processes, one per profile, each
//! carrying a volume to transfer. Between events every active flow drains its
//! volume at its current allocation; a departure fires when the volume is
//! gone. Allocations change only at events, so all metrics are integrated
//! exactly as piecewise-constant functions of time.

pub mod engine;
pub mod report;
pub mod workload;

pub use engine::{
    run, run_observed, run_with_scheme, DepartureSchedule, Event, EventKind, Observer,
};
pub use report::{
    average_connection_worth, EndReason, MetricsIntegrator, ProfileCounts, SessionRecord, SimReport,
};
pub use workload::{sample_workload, Arrival};
