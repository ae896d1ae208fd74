//! Priority-weighted utility allocation with admission control.
//!
//! An arrival goes through three steps:
//!
//! 1. **Admission.** HRT and RT flows need `b_min` on some path, either as
//!    free bandwidth or after hypothetically preempting every flow of lower
//!    priority weight and squeezing the rest to their floors. Elastic flows
//!    skip this step.
//! 2. **Path evaluation.** For every path, compute (without touching the
//!    state) the allocation the path would settle at with the new flow on it,
//!    and the resulting change in path worth.
//! 3. **Commit** the path with the largest worth increment.
//!
//! Within a path, bandwidth is distributed by [`load_balance`]: every flow
//! starts at its floor, then capacity is handed out in increments of `delta`
//! to whichever flow gains the most worth per Mbps from its next increment.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use thiserror::Error;

use crate::network::{
    Flow, FlowId, FlowState, NetworkError, NetworkState, PathId, ValidationPolicy, TOLERANCE,
};
use crate::scheme::{ArrivalOutcome, Scheme, SchemeError, SchemeKind};
use crate::utility::{worth_at, PriorityLevel, TrafficClass, UtilityFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasminError {
    #[error("flow floors sum to {floors} Mbps, above capacity {capacity} Mbps")]
    Infeasible { floors: f64, capacity: f64 },
    #[error("greedy allocation exceeded {0} iterations")]
    IterationLimit(usize),
    #[error("increment size must be finite and positive, got {0}")]
    InvalidDelta(f64),
    #[error("increment size {delta} must be below the smallest RT minimum in use ({floor})")]
    DeltaTooLarge { delta: f64, floor: f64 },
    #[error("flow {0} is not pending")]
    NotPending(FlowId),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasminConfig {
    /// Greedy increment size, Mbps.
    pub delta: f64,
    /// Upper bound on greedy steps per [`load_balance`] call.
    pub max_iterations: usize,
}

impl Default for BasminConfig {
    fn default() -> Self {
        BasminConfig {
            delta: 0.01,
            max_iterations: 10_000_000,
        }
    }
}

impl BasminConfig {
    pub fn validate(&self) -> Result<(), BasminError> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(BasminError::InvalidDelta(self.delta));
        }
        Ok(())
    }

    /// Checks `delta` against the RT minima of the utilities in use. HRT
    /// flows never move in increments, so their minima do not constrain it.
    pub fn validate_for<'a>(
        &self,
        utilities: impl IntoIterator<Item = &'a UtilityFunction>,
    ) -> Result<(), BasminError> {
        self.validate()?;
        let smallest = utilities
            .into_iter()
            .filter(|u| u.class() == TrafficClass::RealTime)
            .map(UtilityFunction::b_min)
            .filter(|&b| b > 0.0)
            .fold(f64::INFINITY, f64::min);
        if self.delta >= smallest {
            return Err(BasminError::DeltaTooLarge {
                delta: self.delta,
                floor: smallest,
            });
        }
        Ok(())
    }
}

/// Input row for [`load_balance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BalanceItem {
    pub id: FlowId,
    pub priority: PriorityLevel,
    pub utility: UtilityFunction,
    /// Allocation every flow starts from.
    pub floor: f64,
    pub cap: f64,
}

impl BalanceItem {
    /// Floor and cap as BASMIN applies them: HRT fixed at `b_max`, RT from
    /// `b_min`, elastic from `delta` (or its cap, if smaller).
    pub fn for_flow(flow: &Flow, delta: f64) -> Self {
        BalanceItem {
            id: flow.id,
            priority: flow.priority,
            utility: flow.utility,
            floor: floor_for(&flow.utility, delta),
            cap: flow.b_max(),
        }
    }

    fn worth(&self, b: f64) -> f64 {
        worth_at(self.priority, &self.utility, b)
    }
}

pub(crate) fn floor_for(utility: &UtilityFunction, delta: f64) -> f64 {
    match utility.class() {
        TrafficClass::Elastic => delta.min(utility.b_max()),
        _ => utility.b_min(),
    }
}

struct Candidate {
    density: f64,
    id: FlowId,
    slot: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Max-heap: highest density first, then lowest flow id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.density
            .total_cmp(&other.density)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Track {
    steps: u64,
    x: f64,
}

/// Grid point `floor + steps * delta`, clamped at the cap.
fn grid_point(item: &BalanceItem, steps: u64, delta: f64) -> f64 {
    (item.floor + steps as f64 * delta).min(item.cap)
}

fn next_density(item: &BalanceItem, track: &Track, delta: f64) -> (f64, f64) {
    let next = grid_point(item, track.steps + 1, delta);
    let width = next - track.x;
    ((item.worth(next) - item.worth(track.x)) / width, next)
}

/// Distributes `capacity` among `items` greedily by worth gained per Mbps.
///
/// Each flow starts at its floor. Then, repeatedly, the flow whose next
/// `delta`-increment (clipped at its cap) yields the largest worth per Mbps
/// receives that increment, or whatever capacity is left if less. Ties go to
/// the lowest flow id. Stops when capacity runs out or every flow is capped.
///
/// The increment is ranked by its exact worth gain over its width rather than
/// the slope at its left end; for concave curves this makes the greedy exactly
/// optimal on the `delta`-grid.
pub fn load_balance(
    capacity: f64,
    items: &[BalanceItem],
    config: &BasminConfig,
) -> Result<BTreeMap<FlowId, f64>, BasminError> {
    config.validate()?;
    let delta = config.delta;
    let floors: f64 = items.iter().map(|i| i.floor).sum();
    if floors > capacity + TOLERANCE {
        return Err(BasminError::Infeasible { floors, capacity });
    }
    let mut remaining = (capacity - floors).max(0.0);
    let mut tracks: Vec<Track> = items
        .iter()
        .map(|i| Track {
            steps: 0,
            x: i.floor,
        })
        .collect();

    let mut heap = BinaryHeap::with_capacity(items.len());
    for (slot, item) in items.iter().enumerate() {
        if item.cap - item.floor > TOLERANCE {
            let (density, _) = next_density(item, &tracks[slot], delta);
            heap.push(Candidate {
                density,
                id: item.id,
                slot,
            });
        }
    }

    let mut iterations = 0usize;
    while remaining > 1e-12 {
        let Some(top) = heap.pop() else { break };
        iterations += 1;
        if iterations > config.max_iterations {
            return Err(BasminError::IterationLimit(config.max_iterations));
        }
        let item = &items[top.slot];
        let track = &mut tracks[top.slot];
        let next = grid_point(item, track.steps + 1, delta);
        let width = next - track.x;
        if width > remaining {
            track.x += remaining;
            break;
        }
        track.steps += 1;
        track.x = next;
        remaining -= width;
        if item.cap - track.x > 1e-12 {
            let (density, _) = next_density(item, track, delta);
            heap.push(Candidate {
                density,
                id: item.id,
                slot: top.slot,
            });
        } else {
            track.x = item.cap;
        }
    }

    Ok(items
        .iter()
        .zip(&tracks)
        .map(|(i, t)| (i.id, t.x))
        .collect())
}

/// Bandwidth left on `path` if every active flow of lower priority weight
/// than `new_flow` were preempted and the rest squeezed to their floors.
pub fn hypothetical_available(
    state: &NetworkState,
    path: PathId,
    new_flow: FlowId,
    delta: f64,
) -> Result<f64, BasminError> {
    let weight = state.flow(new_flow)?.weight();
    let capacity = state.path(path)?.capacity;
    let held: f64 = state
        .active_on(path)?
        .filter(|f| f.weight() >= weight)
        .map(|f| floor_for(&f.utility, delta))
        .sum();
    Ok((capacity - held).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admission {
    Admit,
    /// Admitted only under the assumption that lower-weight flows give way.
    AdmitWithPreemption,
    Reject,
}

impl Admission {
    pub fn is_admit(self) -> bool {
        self != Admission::Reject
    }
}

/// First barrier for HRT and RT arrivals; elastic flows always pass.
pub fn admission_check(
    state: &NetworkState,
    new_flow: FlowId,
    config: &BasminConfig,
) -> Result<Admission, BasminError> {
    let flow = state.flow(new_flow)?;
    if flow.state != FlowState::Pending {
        return Err(BasminError::NotPending(new_flow));
    }
    if flow.class() == TrafficClass::Elastic {
        return Ok(Admission::Admit);
    }
    let need = flow.b_min();
    for p in state.paths() {
        if state.available_bandwidth(p.id)? >= need - TOLERANCE {
            return Ok(Admission::Admit);
        }
    }
    for p in state.paths() {
        if hypothetical_available(state, p.id, new_flow, config.delta)? >= need - TOLERANCE {
            return Ok(Admission::AdmitWithPreemption);
        }
    }
    Ok(Admission::Reject)
}

/// Outcome of trying a new flow on one path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCandidate {
    pub path: PathId,
    pub feasible: bool,
    /// New allocation for every flow that stays on the path, including the
    /// new flow; preempted flows map to 0.
    pub proposed_allocations: BTreeMap<FlowId, f64>,
    pub preempted: Vec<FlowId>,
    /// Path worth after the change minus path worth before it.
    pub worth_increment: f64,
}

impl PathCandidate {
    fn infeasible(path: PathId) -> Self {
        PathCandidate {
            path,
            feasible: false,
            proposed_allocations: BTreeMap::new(),
            preempted: Vec::new(),
            worth_increment: f64::NEG_INFINITY,
        }
    }
}

/// Worth per Mbps of restoring a preempted flow at its floor.
fn restore_density(item: &BalanceItem) -> f64 {
    item.worth(item.floor) / item.floor
}

/// Computes what `path` would look like with `new_flow` on it. Pure.
///
/// Lower-weight flows are preempted only when the new flow cannot fit at its
/// floor next to everybody else at theirs. In that case all of them are
/// dropped tentatively and then re-admitted, best restore density first,
/// as long as their floors still fit.
pub fn evaluate_path(
    state: &NetworkState,
    path: PathId,
    new_flow: FlowId,
    config: &BasminConfig,
) -> Result<PathCandidate, BasminError> {
    let capacity = state.path(path)?.capacity;
    let newcomer = state.flow(new_flow)?;
    let new_item = BalanceItem::for_flow(newcomer, config.delta);
    let current: Vec<BalanceItem> = state
        .active_on(path)?
        .map(|f| BalanceItem::for_flow(f, config.delta))
        .collect();

    let squeezed: f64 = current.iter().map(|i| i.floor).sum();
    let mut members: Vec<BalanceItem>;
    let mut preempted = Vec::new();
    if squeezed + new_item.floor <= capacity + TOLERANCE {
        members = current.clone();
    } else {
        let weight = newcomer.weight();
        let (survivors, mut lower): (Vec<BalanceItem>, Vec<BalanceItem>) = current
            .iter()
            .copied()
            .partition(|i| i.priority.weight() >= weight);
        let held: f64 = survivors.iter().map(|i| i.floor).sum();
        let mut room = capacity - held - new_item.floor;
        if room < -TOLERANCE {
            return Ok(PathCandidate::infeasible(path));
        }
        members = survivors;
        lower.sort_by(|a, b| {
            restore_density(b)
                .total_cmp(&restore_density(a))
                .then_with(|| a.id.cmp(&b.id))
        });
        for item in lower {
            if item.floor <= room + TOLERANCE {
                room -= item.floor;
                members.push(item);
            } else {
                preempted.push(item.id);
            }
        }
        preempted.sort_unstable();
    }
    members.push(new_item);
    members.sort_by_key(|i| i.id);

    let mut proposed = load_balance(capacity, &members, config)?;
    let after: f64 = members.iter().map(|i| i.worth(proposed[&i.id])).sum();
    let before = state.path_worth(path)?;
    for id in &preempted {
        proposed.insert(*id, 0.0);
    }
    Ok(PathCandidate {
        path,
        feasible: true,
        proposed_allocations: proposed,
        preempted,
        worth_increment: after - before,
    })
}

/// Feasible candidate with the largest worth increment; ties go to the lowest
/// path id.
pub fn select_path(candidates: &[PathCandidate]) -> Option<PathId> {
    let mut best: Option<&PathCandidate> = None;
    for c in candidates.iter().filter(|c| c.feasible) {
        best = match best {
            Some(b) if c.worth_increment > b.worth_increment => Some(c),
            Some(b) if c.worth_increment == b.worth_increment && c.path < b.path => Some(c),
            Some(b) => Some(b),
            None => Some(c),
        };
    }
    best.map(|c| c.path)
}

/// What happened to an arrival, with the candidate that was committed.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalRecord {
    pub admission: Admission,
    pub outcome: ArrivalOutcome,
    pub committed: Option<PathCandidate>,
}

/// Runs all three steps for a pending flow and commits the result.
pub fn handle_arrival(
    state: &mut NetworkState,
    new_flow: FlowId,
    config: &BasminConfig,
) -> Result<ArrivalRecord, BasminError> {
    let admission = admission_check(state, new_flow, config)?;
    if admission == Admission::Reject {
        state.reject(new_flow)?;
        return Ok(ArrivalRecord {
            admission,
            outcome: ArrivalOutcome::Rejected,
            committed: None,
        });
    }
    let mut candidates = Vec::with_capacity(state.paths().len());
    for p in state.paths() {
        candidates.push(evaluate_path(state, p.id, new_flow, config)?);
    }
    let Some(chosen) = select_path(&candidates) else {
        state.reject(new_flow)?;
        return Ok(ArrivalRecord {
            admission,
            outcome: ArrivalOutcome::Rejected,
            committed: None,
        });
    };
    let candidate = candidates.swap_remove(chosen.0);
    debug_assert_eq!(candidate.path, chosen);
    for id in &candidate.preempted {
        state.close(*id, FlowState::Preempted)?;
    }
    for (&id, &b) in &candidate.proposed_allocations {
        if id == new_flow {
            state.activate(id, chosen, b)?;
        } else if !candidate.preempted.contains(&id) {
            state.set_allocation(id, b)?;
        }
    }
    Ok(ArrivalRecord {
        admission,
        outcome: ArrivalOutcome::Admitted {
            path: chosen,
            preempted: candidate.preempted.clone(),
        },
        committed: Some(candidate),
    })
}

/// Re-runs [`load_balance`] over the active flows of one path.
pub fn rebalance_path(
    state: &mut NetworkState,
    path: PathId,
    config: &BasminConfig,
) -> Result<(), BasminError> {
    let capacity = state.path(path)?.capacity;
    let items: Vec<BalanceItem> = state
        .active_on(path)?
        .map(|f| BalanceItem::for_flow(f, config.delta))
        .collect();
    for (id, b) in load_balance(capacity, &items, config)? {
        state.set_allocation(id, b)?;
    }
    Ok(())
}

/// Closes a finished flow and redistributes its bandwidth on its own path.
pub fn handle_departure(
    state: &mut NetworkState,
    flow: FlowId,
    config: &BasminConfig,
) -> Result<PathId, BasminError> {
    let path = state.close(flow, FlowState::Completed)?;
    rebalance_path(state, path, config)?;
    Ok(path)
}

/// [`Scheme`] adapter over the functions above.
#[derive(Clone, Debug, Default)]
pub struct Basmin {
    config: BasminConfig,
}

impl Basmin {
    pub fn new(config: BasminConfig) -> Self {
        Basmin { config }
    }

    pub fn config(&self) -> &BasminConfig {
        &self.config
    }
}

impl Scheme for Basmin {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Basmin
    }

    fn validation_policy(&self) -> ValidationPolicy {
        ValidationPolicy::STRICT
    }

    fn on_arrival(
        &mut self,
        state: &mut NetworkState,
        flow: FlowId,
    ) -> Result<ArrivalOutcome, SchemeError> {
        Ok(handle_arrival(state, flow, &self.config)?.outcome)
    }

    fn on_departure(&mut self, state: &mut NetworkState, flow: FlowId) -> Result<(), SchemeError> {
        handle_departure(state, flow, &self.config)?;
        Ok(())
    }
}
