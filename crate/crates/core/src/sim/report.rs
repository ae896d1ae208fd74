//! Session records, counters and metric integration.

use std::fmt;

use crate::network::{Flow, FlowState, PathId};
use crate::scenario::ScenarioConfig;
use crate::scheme::SchemeKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EndReason {
    Completed,
    Rejected,
    Preempted,
    Unfinished,
}

impl EndReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EndReason::Completed => "completed",
            EndReason::Rejected => "rejected",
            EndReason::Preempted => "preempted",
            EndReason::Unfinished => "unfinished",
        }
    }

    pub fn from_state(state: FlowState) -> Option<Self> {
        match state {
            FlowState::Completed => Some(EndReason::Completed),
            FlowState::Rejected => Some(EndReason::Rejected),
            FlowState::Preempted => Some(EndReason::Preempted),
            FlowState::Unfinished => Some(EndReason::Unfinished),
            FlowState::Pending | FlowState::Active => None,
        }
    }

    /// Whether the session ever held a path.
    pub fn entered_network(self) -> bool {
        self != EndReason::Rejected
    }
}

impl fmt::Display for EndReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A closed session.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionRecord {
    pub flow_id: u64,
    pub profile_id: u32,
    pub path_id: Option<PathId>,
    pub arrival_s: f64,
    pub end_s: f64,
    pub end_reason: EndReason,
    pub volume_mbit: f64,
    pub transferred_mbit: f64,
    /// Integral of the session's worth over its lifetime.
    pub worth_integral: f64,
    pub utility_integral: f64,
}

impl SessionRecord {
    /// Builds the record of a closed flow.
    pub fn from_flow(flow: &Flow) -> Option<Self> {
        Some(SessionRecord {
            flow_id: flow.id.0,
            profile_id: flow.profile_id,
            path_id: flow.path,
            arrival_s: flow.arrival_time,
            end_s: flow.end_time?,
            end_reason: EndReason::from_state(flow.state)?,
            volume_mbit: flow.total_volume,
            transferred_mbit: flow.transferred,
            worth_integral: flow.worth_integral,
            utility_integral: flow.utility_integral,
        })
    }

    /// Time the session spent in the network.
    pub fn duration(&self) -> f64 {
        self.end_s - self.arrival_s
    }

    pub fn avg_connection_worth(&self) -> f64 {
        average_connection_worth(self.worth_integral, self.duration())
    }
}

/// Worth integral over duration; 0 for a zero-length session.
pub fn average_connection_worth(worth_integral: f64, duration: f64) -> f64 {
    if duration > 0.0 {
        worth_integral / duration
    } else {
        0.0
    }
}

/// Session outcomes for one profile (or all of them), counted over sessions
/// that arrived inside the measurement window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProfileCounts {
    pub profile_id: u32,
    pub offered: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub preempted: u64,
    pub completed: u64,
}

impl ProfileCounts {
    pub fn record(&mut self, reason: EndReason) {
        self.offered += 1;
        match reason {
            EndReason::Rejected => self.rejected += 1,
            EndReason::Preempted => {
                self.accepted += 1;
                self.preempted += 1
            }
            EndReason::Completed => {
                self.accepted += 1;
                self.completed += 1
            }
            EndReason::Unfinished => self.accepted += 1,
        }
    }

    pub fn add(&mut self, other: &ProfileCounts) {
        self.offered += other.offered;
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.preempted += other.preempted;
        self.completed += other.completed;
    }
}

/// Exact integration of piecewise-constant quantities over a time window.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsIntegrator {
    start: f64,
    end: f64,
    last: f64,
    worth: f64,
    used: f64,
}

impl MetricsIntegrator {
    pub fn new(start: f64, end: f64) -> Self {
        MetricsIntegrator {
            start,
            end,
            last: 0.0,
            worth: 0.0,
            used: 0.0,
        }
    }

    /// Accounts for `[last, t)` during which total worth and the used
    /// fraction of capacity held the given values.
    pub fn advance(&mut self, t: f64, total_worth: f64, used_fraction: f64) {
        let lo = self.last.max(self.start);
        let hi = t.min(self.end);
        if hi > lo {
            self.worth += total_worth * (hi - lo);
            self.used += used_fraction * (hi - lo);
        }
        self.last = self.last.max(t);
    }

    fn span(&self) -> f64 {
        self.end - self.start
    }

    pub fn time_avg_total_worth(&self) -> f64 {
        self.worth / self.span()
    }

    pub fn mean_utilization(&self) -> f64 {
        self.used / self.span()
    }
}

/// Outcome of one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub scheme: SchemeKind,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub time_avg_total_worth: f64,
    /// Mean worth per second over sessions that arrived inside the window
    /// and held a path for a positive time. Rejected sessions are excluded;
    /// preempted and unfinished ones count with their truncated duration.
    pub mean_connection_worth: f64,
    pub mean_link_utilization: f64,
    pub per_profile: Vec<ProfileCounts>,
    pub totals: ProfileCounts,
    /// Arrivals plus departures processed.
    pub events: u64,
    /// Every session, ordered by flow id.
    pub sessions: Vec<SessionRecord>,
}

impl SimReport {
    pub(crate) fn assemble(
        config: &ScenarioConfig,
        metrics: &MetricsIntegrator,
        sessions: Vec<SessionRecord>,
        events: u64,
    ) -> Self {
        let mut per_profile: Vec<ProfileCounts> = config
            .profiles
            .iter()
            .map(|p| ProfileCounts {
                profile_id: p.id,
                ..Default::default()
            })
            .collect();
        let mut worth_sum = 0.0;
        let mut worth_n = 0usize;
        for s in sessions.iter().filter(|s| s.arrival_s >= config.warmup_s) {
            if let Some(c) = per_profile
                .iter_mut()
                .find(|c| c.profile_id == s.profile_id)
            {
                c.record(s.end_reason);
            }
            if s.end_reason.entered_network() && s.duration() > 0.0 {
                worth_sum += s.avg_connection_worth();
                worth_n += 1;
            }
        }
        let mut totals = ProfileCounts::default();
        for c in &per_profile {
            totals.add(c);
        }
        SimReport {
            scheme: config.scheme,
            seed: config.seed,
            config: config.clone(),
            time_avg_total_worth: metrics.time_avg_total_worth(),
            mean_connection_worth: if worth_n > 0 {
                worth_sum / worth_n as f64
            } else {
                0.0
            },
            mean_link_utilization: metrics.mean_utilization(),
            per_profile,
            totals,
            events,
            sessions,
        }
    }
}
