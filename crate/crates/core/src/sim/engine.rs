//! The event loop.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::network::{FlowId, FlowState, NetworkError, NetworkState};
use crate::scenario::{ConfigError, ScenarioConfig};
use crate::scheme::{self, Scheme, SchemeError};
use crate::sim::report::{MetricsIntegrator, SessionRecord, SimReport};
use crate::sim::workload::sample_workload;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// The flow created for this arrival.
    Arrival(FlowId),
    Departure(FlowId),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    time: f64,
    flow: FlowId,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.flow.cmp(&other.flow))
    }
}

/// Pending departures with lazy invalidation: a heap entry counts only while
/// it matches the flow's current scheduled time.
#[derive(Clone, Debug, Default)]
pub struct DepartureSchedule {
    heap: BinaryHeap<Reverse<Entry>>,
    scheduled: Vec<Option<f64>>,
    rate: Vec<f64>,
    live: Vec<FlowId>,
}

impl DepartureSchedule {
    /// Scheduled departure of `flow`, if it has one.
    pub fn scheduled(&self, flow: FlowId) -> Option<f64> {
        self.scheduled.get(flow.0 as usize).copied().flatten()
    }

    fn slot(&mut self, flow: FlowId) -> usize {
        let i = flow.0 as usize;
        if i >= self.scheduled.len() {
            self.scheduled.resize(i + 1, None);
            self.rate.resize(i + 1, f64::NAN);
        }
        i
    }

    #[cfg(test)]
    fn set(&mut self, flow: FlowId, time: Option<f64>) {
        let i = self.slot(flow);
        self.scheduled[i] = time;
        if let Some(time) = time {
            self.heap.push(Reverse(Entry { time, flow }));
        }
    }

    fn discard_stale(&mut self) {
        while let Some(Reverse(top)) = self.heap.peek() {
            if self.scheduled(top.flow) == Some(top.time) {
                return;
            }
            self.heap.pop();
        }
    }

    /// Earliest valid departure.
    pub fn peek(&mut self) -> Option<(f64, FlowId)> {
        self.discard_stale();
        self.heap.peek().map(|Reverse(e)| (e.time, e.flow))
    }

    fn take(&mut self, flow: FlowId) {
        let i = self.slot(flow);
        self.scheduled[i] = None;
        self.rate[i] = f64::NAN;
    }

    /// Reschedules every active flow whose rate changed since the last call
    /// and forgets flows that are no longer active.
    fn refresh(&mut self, state: &NetworkState) {
        let now = state.now();
        for id in std::mem::take(&mut self.live) {
            let gone = state.flow(id).map_or(true, |f| !f.is_active());
            if gone {
                self.take(id);
            }
        }
        let mut changed = Vec::new();
        for f in state.active_flows() {
            let i = self.slot(f.id);
            self.live.push(f.id);
            if self.rate[i] == f.allocation {
                continue;
            }
            self.rate[i] = f.allocation;
            let when = (f.allocation > 0.0).then(|| now + f.remaining_volume / f.allocation);
            self.scheduled[i] = when;
            if let Some(time) = when {
                changed.push(Entry { time, flow: f.id });
            }
        }
        if self.heap.len() + changed.len() > 2 * self.live.len() + 64 {
            // Mostly stale: rebuild from the current schedule in linear time.
            let entries: Vec<Reverse<Entry>> = self
                .live
                .iter()
                .filter_map(|&flow| {
                    self.scheduled(flow)
                        .map(|time| Reverse(Entry { time, flow }))
                })
                .collect();
            self.heap = BinaryHeap::from(entries);
        } else {
            self.heap.extend(changed.into_iter().map(Reverse));
        }
    }
}

/// Receives the state after every processed event.
pub trait Observer {
    fn after_event(&mut self, event: &Event, state: &NetworkState, schedule: &DepartureSchedule);
}

impl<F> Observer for F
where
    F: FnMut(&Event, &NetworkState, &DepartureSchedule),
{
    fn after_event(&mut self, event: &Event, state: &NetworkState, schedule: &DepartureSchedule) {
        self(event, state, schedule)
    }
}

struct Silent;

impl Observer for Silent {
    fn after_event(&mut self, _: &Event, _: &NetworkState, _: &DepartureSchedule) {}
}

/// Runs the scenario with the scheme it names.
pub fn run(config: &ScenarioConfig) -> Result<SimReport, SimError> {
    run_observed(config, &mut Silent)
}

pub fn run_observed(
    config: &ScenarioConfig,
    observer: &mut dyn Observer,
) -> Result<SimReport, SimError> {
    let mut scheme = scheme::build(config.scheme, &config.params);
    run_with_scheme(config, scheme.as_mut(), observer)
}

fn used_fraction(state: &NetworkState, total_capacity: f64) -> f64 {
    let used: f64 = state.active_flows().map(|f| f.allocation).sum();
    used / total_capacity
}

/// Runs the scenario's workload against an arbitrary scheme.
pub fn run_with_scheme(
    config: &ScenarioConfig,
    scheme: &mut dyn Scheme,
    observer: &mut dyn Observer,
) -> Result<SimReport, SimError> {
    config.validate()?;
    let arrivals = sample_workload(config);
    let mut state = NetworkState::new(&config.paths)?;
    let total_capacity = state.total_capacity();
    let mut schedule = DepartureSchedule::default();
    let mut metrics = MetricsIntegrator::new(config.warmup_s, config.horizon_s);
    let mut next_arrival = 0usize;
    let mut events = 0u64;

    loop {
        let arrival_at = arrivals.get(next_arrival).map(|a| a.time);
        let departure = schedule.peek();
        let (time, is_departure) = match (arrival_at, departure) {
            (None, None) => break,
            (Some(a), Some((d, _))) => {
                if d <= a {
                    (d, true)
                } else {
                    (a, false)
                }
            }
            (Some(a), None) => (a, false),
            (None, Some((d, _))) => (d, true),
        };
        if time > config.horizon_s {
            break;
        }
        metrics.advance(
            time,
            state.total_worth(),
            used_fraction(&state, total_capacity),
        );
        state.advance_to(time)?;
        let kind = if is_departure {
            let (_, id) = departure.expect("departure chosen");
            schedule.take(id);
            scheme.on_departure(&mut state, id)?;
            EventKind::Departure(id)
        } else {
            let a = &arrivals[next_arrival];
            next_arrival += 1;
            let id = state.add_flow(&config.profiles[a.profile], a.volume_mbit);
            scheme.on_arrival(&mut state, id)?;
            EventKind::Arrival(id)
        };
        events += 1;
        schedule.refresh(&state);
        observer.after_event(&Event { time, kind }, &state, &schedule);
    }

    metrics.advance(
        config.horizon_s,
        state.total_worth(),
        used_fraction(&state, total_capacity),
    );
    state.advance_to(config.horizon_s)?;
    let alive: Vec<FlowId> = state.active_flows().map(|f| f.id).collect();
    for id in alive {
        state.close(id, FlowState::Unfinished)?;
    }
    let sessions = state
        .flows()
        .iter()
        .filter_map(SessionRecord::from_flow)
        .collect();
    Ok(SimReport::assemble(config, &metrics, sessions, events))
}
