//! Comparison schemes: best effort, complete partitioning and trunk
//! reservation.
//!
//! All three place an arrival on a single path, preferring the path with the
//! most available bandwidth, then the one with fewer active flows, then the
//! lowest id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{
    FlowId, FlowState, NetworkError, NetworkState, PathId, ValidationPolicy, TOLERANCE,
};
use crate::scheme::{ArrivalOutcome, Scheme, SchemeError, SchemeKind};
use crate::utility::{TrafficClass, UtilityFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("shares must sum to 1 (got {0})")]
    SharesSum(f64),
    #[error("share `{name}` must be a finite non-negative fraction, got {value}")]
    InvalidShare { name: &'static str, value: f64 },
    #[error("eta must lie in [0, 1], got {0}")]
    InvalidEta(f64),
}

/// Capped max-min share with per-flow floors.
///
/// Every flow gets `clamp(L, lo, hi)` for the largest common level `L` whose
/// total fits in `capacity`. Caps may be infinite. If the floors alone exceed
/// the capacity every flow gets its floor.
pub fn water_fill(capacity: f64, bounds: &[(f64, f64)]) -> Vec<f64> {
    let floors: f64 = bounds.iter().map(|b| b.0).sum();
    if floors >= capacity {
        return bounds.iter().map(|b| b.0).collect();
    }
    let ceiling: f64 = bounds.iter().map(|b| b.1).sum();
    if ceiling <= capacity {
        return bounds.iter().map(|b| b.1).collect();
    }

    // Sweep the breakpoints of L -> sum(clamp(L, lo, hi)), which is
    // piecewise linear with slope equal to the number of unclamped flows.
    let mut events: Vec<(f64, i64)> = Vec::with_capacity(2 * bounds.len());
    for &(lo, hi) in bounds {
        events.push((lo, 1));
        if hi.is_finite() {
            events.push((hi, -1));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut level = events.first().map_or(0.0, |e| e.0);
    let mut total = floors;
    let mut slope = 0i64;
    let mut found = None;
    for &(at, step) in &events {
        let next = total + slope as f64 * (at - level);
        if slope > 0 && next >= capacity {
            found = Some(level + (capacity - total) / slope as f64);
            break;
        }
        total = next;
        level = at;
        slope += step;
    }
    let level = found.unwrap_or_else(|| level + (capacity - total) / slope.max(1) as f64);
    bounds.iter().map(|&(lo, hi)| level.clamp(lo, hi)).collect()
}

/// A flow as the baselines see it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Demand {
    pub id: FlowId,
    pub utility: UtilityFunction,
}

fn collect(demands: &[Demand], values: Vec<f64>) -> BTreeMap<FlowId, f64> {
    demands.iter().map(|d| d.id).zip(values).collect()
}

/// Equal split capped at each flow's `b_max`, surplus re-split.
pub fn best_effort_allocate(capacity: f64, demands: &[Demand]) -> BTreeMap<FlowId, f64> {
    let bounds: Vec<(f64, f64)> = demands.iter().map(|d| (0.0, d.utility.b_max())).collect();
    collect(demands, water_fill(capacity, &bounds))
}

/// Fractions of each path's capacity reserved per traffic class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionShares {
    pub hrt: f64,
    pub rt: f64,
    pub elastic: f64,
}

impl Default for PartitionShares {
    fn default() -> Self {
        PartitionShares {
            hrt: 0.1,
            rt: 0.4,
            elastic: 0.5,
        }
    }
}

impl PartitionShares {
    pub fn validate(&self) -> Result<(), BaselineError> {
        for (name, value) in [
            ("hrt", self.hrt),
            ("rt", self.rt),
            ("elastic", self.elastic),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(BaselineError::InvalidShare { name, value });
            }
        }
        let sum = self.hrt + self.rt + self.elastic;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(BaselineError::SharesSum(sum));
        }
        Ok(())
    }

    pub fn of(&self, class: TrafficClass) -> f64 {
        match class {
            TrafficClass::HardRealTime => self.hrt,
            TrafficClass::RealTime => self.rt,
            TrafficClass::Elastic => self.elastic,
        }
    }
}

/// Best-effort split inside each class partition; idle partitions stay idle.
pub fn complete_partitioning_allocate(
    capacity: f64,
    demands: &[Demand],
    shares: &PartitionShares,
) -> BTreeMap<FlowId, f64> {
    let mut out = BTreeMap::new();
    for class in TrafficClass::ALL {
        let members: Vec<Demand> = demands
            .iter()
            .copied()
            .filter(|d| d.utility.class() == class)
            .collect();
        out.extend(best_effort_allocate(shares.of(class) * capacity, &members));
    }
    out
}

/// How the utilities of active RT flows are reduced to the single level
/// compared against `eta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RtAggregate {
    #[default]
    Mean,
    Minimum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrunkReservationConfig {
    pub eta: f64,
    #[serde(default)]
    pub aggregate: RtAggregate,
}

impl Default for TrunkReservationConfig {
    fn default() -> Self {
        TrunkReservationConfig {
            eta: 0.9,
            aggregate: RtAggregate::Mean,
        }
    }
}

impl TrunkReservationConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(BaselineError::InvalidEta(self.eta));
        }
        Ok(())
    }
}

/// HRT flows at `b_max`; RT in `[b_min, b_max]` and elastic in `[0, inf)`
/// share the rest max-min.
pub fn trunk_reservation_allocate(capacity: f64, demands: &[Demand]) -> BTreeMap<FlowId, f64> {
    let bounds: Vec<(f64, f64)> = demands
        .iter()
        .map(|d| match d.utility.class() {
            TrafficClass::HardRealTime => (d.utility.b_max(), d.utility.b_max()),
            TrafficClass::RealTime => (d.utility.b_min(), d.utility.b_max()),
            TrafficClass::Elastic => (0.0, f64::INFINITY),
        })
        .collect();
    collect(demands, water_fill(capacity, &bounds))
}

/// Utility level of the active RT flows on `path`, `None` if there are none.
pub fn rt_utility_level(
    state: &NetworkState,
    path: PathId,
    aggregate: RtAggregate,
) -> Result<Option<f64>, NetworkError> {
    let levels: Vec<f64> = state
        .active_on(path)?
        .filter(|f| f.class() == TrafficClass::RealTime)
        .map(|f| f.utility.value(f.allocation))
        .collect();
    if levels.is_empty() {
        return Ok(None);
    }
    Ok(Some(match aggregate {
        RtAggregate::Mean => levels.iter().sum::<f64>() / levels.len() as f64,
        RtAggregate::Minimum => levels.iter().copied().fold(f64::INFINITY, f64::min),
    }))
}

/// Trunk-reservation admission test for a pending flow on one path.
pub fn trunk_reservation_admits(
    state: &NetworkState,
    path: PathId,
    flow: FlowId,
    config: &TrunkReservationConfig,
) -> Result<bool, NetworkError> {
    let f = state.flow(flow)?;
    if f.class() == TrafficClass::Elastic {
        return Ok(match rt_utility_level(state, path, config.aggregate)? {
            Some(level) => level >= config.eta,
            None => true,
        });
    }
    let reserved: f64 = state
        .active_on(path)?
        .filter(|g| g.class() != TrafficClass::Elastic)
        .map(|g| g.b_min())
        .sum();
    Ok(state.path(path)?.capacity - reserved >= f.b_min() - TOLERANCE)
}

/// Paths ordered by available bandwidth (descending), active flow count,
/// then id.
pub fn preferred_paths(state: &NetworkState) -> Result<Vec<PathId>, NetworkError> {
    let mut keyed = Vec::with_capacity(state.paths().len());
    for p in state.paths() {
        keyed.push((
            state.available_bandwidth(p.id)?,
            state.active_ids(p.id)?.len(),
            p.id,
        ));
    }
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(keyed.into_iter().map(|k| k.2).collect())
}

fn demands_on(state: &NetworkState, path: PathId) -> Result<Vec<Demand>, NetworkError> {
    Ok(state
        .active_on(path)?
        .map(|f| Demand {
            id: f.id,
            utility: f.utility,
        })
        .collect())
}

fn apply(state: &mut NetworkState, allocation: BTreeMap<FlowId, f64>) -> Result<(), NetworkError> {
    for (id, b) in allocation {
        state.set_allocation(id, b)?;
    }
    Ok(())
}

/// Places `flow` on `path` at zero, then reallocates the path with `alloc`.
fn place(
    state: &mut NetworkState,
    path: PathId,
    flow: FlowId,
    alloc: impl Fn(f64, &[Demand]) -> BTreeMap<FlowId, f64>,
) -> Result<ArrivalOutcome, NetworkError> {
    state.activate(flow, path, 0.0)?;
    reallocate(state, path, alloc)?;
    Ok(ArrivalOutcome::Admitted {
        path,
        preempted: Vec::new(),
    })
}

fn reallocate(
    state: &mut NetworkState,
    path: PathId,
    alloc: impl Fn(f64, &[Demand]) -> BTreeMap<FlowId, f64>,
) -> Result<(), NetworkError> {
    let capacity = state.path(path)?.capacity;
    let demands = demands_on(state, path)?;
    apply(state, alloc(capacity, &demands))
}

fn depart(
    state: &mut NetworkState,
    flow: FlowId,
    alloc: impl Fn(f64, &[Demand]) -> BTreeMap<FlowId, f64>,
) -> Result<(), NetworkError> {
    let path = state.close(flow, FlowState::Completed)?;
    reallocate(state, path, alloc)
}

/// No admission control; capped equal share per path.
#[derive(Clone, Copy, Debug, Default)]
pub struct BestEffort;

impl Scheme for BestEffort {
    fn kind(&self) -> SchemeKind {
        SchemeKind::BestEffort
    }

    fn validation_policy(&self) -> ValidationPolicy {
        ValidationPolicy::NO_MINIMUMS
    }

    fn on_arrival(
        &mut self,
        state: &mut NetworkState,
        flow: FlowId,
    ) -> Result<ArrivalOutcome, SchemeError> {
        let path = preferred_paths(state)?[0];
        Ok(place(state, path, flow, best_effort_allocate)?)
    }

    fn on_departure(&mut self, state: &mut NetworkState, flow: FlowId) -> Result<(), SchemeError> {
        Ok(depart(state, flow, best_effort_allocate)?)
    }
}

/// No admission control; fixed per-class partitions of every path.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompletePartitioning {
    shares: PartitionShares,
}

impl CompletePartitioning {
    pub fn new(shares: PartitionShares) -> Self {
        CompletePartitioning { shares }
    }
}

impl Scheme for CompletePartitioning {
    fn kind(&self) -> SchemeKind {
        SchemeKind::CompletePartitioning
    }

    fn validation_policy(&self) -> ValidationPolicy {
        ValidationPolicy::NO_MINIMUMS
    }

    fn on_arrival(
        &mut self,
        state: &mut NetworkState,
        flow: FlowId,
    ) -> Result<ArrivalOutcome, SchemeError> {
        let path = preferred_paths(state)?[0];
        let shares = self.shares;
        Ok(place(state, path, flow, |c, d| {
            complete_partitioning_allocate(c, d, &shares)
        })?)
    }

    fn on_departure(&mut self, state: &mut NetworkState, flow: FlowId) -> Result<(), SchemeError> {
        let shares = self.shares;
        Ok(depart(state, flow, |c, d| {
            complete_partitioning_allocate(c, d, &shares)
        })?)
    }
}

/// Guaranteed minima for HRT/RT; elastic admitted only while RT flows are
/// doing well; elastic rates uncapped.
#[derive(Clone, Copy, Debug, Default)]
pub struct TrunkReservation {
    config: TrunkReservationConfig,
}

impl TrunkReservation {
    pub fn new(config: TrunkReservationConfig) -> Self {
        TrunkReservation { config }
    }
}

impl Scheme for TrunkReservation {
    fn kind(&self) -> SchemeKind {
        SchemeKind::TrunkReservation
    }

    fn validation_policy(&self) -> ValidationPolicy {
        ValidationPolicy::UNCAPPED_ELASTIC
    }

    fn on_arrival(
        &mut self,
        state: &mut NetworkState,
        flow: FlowId,
    ) -> Result<ArrivalOutcome, SchemeError> {
        for path in preferred_paths(state)? {
            if trunk_reservation_admits(state, path, flow, &self.config)? {
                return Ok(place(state, path, flow, trunk_reservation_allocate)?);
            }
        }
        state.reject(flow)?;
        Ok(ArrivalOutcome::Rejected)
    }

    fn on_departure(&mut self, state: &mut NetworkState, flow: FlowId) -> Result<(), SchemeError> {
        Ok(depart(state, flow, trunk_reservation_allocate)?)
    }
}
