//! Parallel-path network, traffic profiles, and the session table.
//!
//! Every path is a single bottleneck between one ingress/egress pair, so the
//! link-capacity constraint collapses to `sum(b_s) <= C_p` per path. The
//! [`NetworkState`] is the single source of truth for allocations; schemes
//! mutate it through the narrow set of methods below, which enforce the flow
//! lifecycle.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::utility::{worth_at, PriorityLevel, TrafficClass, UtilityError, UtilityFunction};

/// Slack allowed on capacity and range checks.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("unknown path {0}")]
    UnknownPath(PathId),
    #[error("unknown flow {0}")]
    UnknownFlow(FlowId),
    #[error("flow {flow}: illegal transition {from:?} -> {to:?}")]
    IllegalTransition {
        flow: FlowId,
        from: FlowState,
        to: FlowState,
    },
    #[error("flow {0} is not active")]
    NotActive(FlowId),
    #[error("path capacity must be finite and positive, got {0}")]
    InvalidCapacity(f64),
    #[error("allocation for flow {flow} must be finite and non-negative, got {value}")]
    InvalidAllocation { flow: FlowId, value: f64 },
    #[error("clock cannot move backwards from {now} to {to}")]
    TimeReversal { now: f64, to: f64 },
    #[error("profile {id}: {reason}")]
    InvalidProfile { id: u32, reason: String },
    #[error(transparent)]
    Utility(#[from] UtilityError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathId(pub usize);

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Flow ids are dense, assigned in arrival order, and double as the universal
/// tie-breaker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowId(pub u64);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

/// One row of the traffic-profile table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficProfile {
    pub id: u32,
    pub label: String,
    pub priority: PriorityLevel,
    /// Session size range `[low, high]` in Mbit.
    pub volume_mbit: [f64; 2],
    pub utility: UtilityFunction,
}

impl TrafficProfile {
    pub fn class(&self) -> TrafficClass {
        self.utility.class()
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        self.utility.validate()?;
        let [low, high] = self.volume_mbit;
        if !(low > 0.0 && low <= high && high.is_finite()) {
            return Err(NetworkError::InvalidProfile {
                id: self.id,
                reason: format!("volume range must satisfy 0 < low <= high, got [{low}, {high}]"),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub id: PathId,
    /// `C_p`, Mbps.
    pub capacity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowState {
    Pending,
    Active,
    Completed,
    Rejected,
    Preempted,
    /// Still in the network when the simulation horizon was reached.
    Unfinished,
}

impl FlowState {
    pub fn can_become(self, next: FlowState) -> bool {
        use FlowState::*;
        matches!(
            (self, next),
            (Pending, Active)
                | (Pending, Rejected)
                | (Active, Completed)
                | (Active, Preempted)
                | (Active, Unfinished)
        )
    }

    pub fn is_terminal(self) -> bool {
        !matches!(self, FlowState::Pending | FlowState::Active)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FlowState::Pending => "pending",
            FlowState::Active => "active",
            FlowState::Completed => "completed",
            FlowState::Rejected => "rejected",
            FlowState::Preempted => "preempted",
            FlowState::Unfinished => "unfinished",
        }
    }
}

/// A unicast session and its accounting.
#[derive(Clone, Debug, PartialEq)]
pub struct Flow {
    pub id: FlowId,
    pub profile_id: u32,
    pub priority: PriorityLevel,
    pub utility: UtilityFunction,
    pub arrival_time: f64,
    pub end_time: Option<f64>,
    /// Mbit.
    pub total_volume: f64,
    pub remaining_volume: f64,
    /// Integral of the allocation over the flow's lifetime, Mbit.
    pub transferred: f64,
    pub path: Option<PathId>,
    /// `b_s`, Mbps.
    pub allocation: f64,
    pub state: FlowState,
    pub worth_integral: f64,
    pub utility_integral: f64,
}

impl Flow {
    pub fn class(&self) -> TrafficClass {
        self.utility.class()
    }

    pub fn weight(&self) -> f64 {
        self.priority.weight()
    }

    pub fn worth(&self) -> f64 {
        worth_at(self.priority, &self.utility, self.allocation)
    }

    pub fn b_min(&self) -> f64 {
        self.utility.b_min()
    }

    pub fn b_max(&self) -> f64 {
        self.utility.b_max()
    }

    pub fn is_active(&self) -> bool {
        self.state == FlowState::Active
    }
}

/// Which range constraints a scheme promises to keep.
///
/// Best effort and complete partitioning have no admission control, so they
/// hand out less than `b_min` by construction; trunk reservation lets elastic
/// flows exceed `b_max`. Capacity and non-negativity are always checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationPolicy {
    pub enforce_minimums: bool,
    pub cap_elastic: bool,
}

impl ValidationPolicy {
    pub const STRICT: ValidationPolicy = ValidationPolicy {
        enforce_minimums: true,
        cap_elastic: true,
    };
    pub const NO_MINIMUMS: ValidationPolicy = ValidationPolicy {
        enforce_minimums: false,
        cap_elastic: true,
    };
    pub const UNCAPPED_ELASTIC: ValidationPolicy = ValidationPolicy {
        enforce_minimums: true,
        cap_elastic: false,
    };
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        ValidationPolicy::STRICT
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    CapacityExceeded {
        path: PathId,
        consumed: f64,
        capacity: f64,
    },
    BelowMinimum {
        flow: FlowId,
        path: PathId,
        allocation: f64,
        minimum: f64,
    },
    AboveMaximum {
        flow: FlowId,
        path: PathId,
        allocation: f64,
        maximum: f64,
    },
    NegativeAllocation {
        flow: FlowId,
        allocation: f64,
    },
    /// The path index and the flow table disagree.
    Inconsistent {
        flow: FlowId,
        detail: &'static str,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CapacityExceeded {
                path,
                consumed,
                capacity,
            } => write!(f, "{path}: consumed {consumed} exceeds capacity {capacity}"),
            Violation::BelowMinimum {
                flow,
                path,
                allocation,
                minimum,
            } => write!(
                f,
                "{flow} on {path}: allocation {allocation} below minimum {minimum}"
            ),
            Violation::AboveMaximum {
                flow,
                path,
                allocation,
                maximum,
            } => write!(
                f,
                "{flow} on {path}: allocation {allocation} above maximum {maximum}"
            ),
            Violation::NegativeAllocation { flow, allocation } => {
                write!(f, "{flow}: negative allocation {allocation}")
            }
            Violation::Inconsistent { flow, detail } => write!(f, "{flow}: {detail}"),
        }
    }
}

/// Paths, the session table, and the per-path index of active flows.
#[derive(Clone, Debug)]
pub struct NetworkState {
    paths: Vec<Path>,
    flows: Vec<Flow>,
    on_path: Vec<BTreeSet<FlowId>>,
    now: f64,
}

impl NetworkState {
    pub fn new(capacities: &[f64]) -> Result<Self, NetworkError> {
        let mut paths = Vec::with_capacity(capacities.len());
        for (i, &c) in capacities.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(NetworkError::InvalidCapacity(c));
            }
            paths.push(Path {
                id: PathId(i),
                capacity: c,
            });
        }
        Ok(NetworkState {
            on_path: vec![BTreeSet::new(); paths.len()],
            paths,
            flows: Vec::new(),
            now: 0.0,
        })
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, id: PathId) -> Result<&Path, NetworkError> {
        self.paths.get(id.0).ok_or(NetworkError::UnknownPath(id))
    }

    pub fn total_capacity(&self) -> f64 {
        self.paths.iter().map(|p| p.capacity).sum()
    }

    /// Every flow ever created, indexed by id.
    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn flow(&self, id: FlowId) -> Result<&Flow, NetworkError> {
        usize::try_from(id.0)
            .ok()
            .and_then(|i| self.flows.get(i))
            .ok_or(NetworkError::UnknownFlow(id))
    }

    fn flow_mut(&mut self, id: FlowId) -> Result<&mut Flow, NetworkError> {
        usize::try_from(id.0)
            .ok()
            .and_then(|i| self.flows.get_mut(i))
            .ok_or(NetworkError::UnknownFlow(id))
    }

    /// Ids of the active flows on `path`, ascending.
    pub fn active_ids(&self, path: PathId) -> Result<&BTreeSet<FlowId>, NetworkError> {
        self.on_path
            .get(path.0)
            .ok_or(NetworkError::UnknownPath(path))
    }

    pub fn active_on(
        &self,
        path: PathId,
    ) -> Result<impl Iterator<Item = &Flow> + '_, NetworkError> {
        Ok(self
            .active_ids(path)?
            .iter()
            .map(move |id| &self.flows[id.0 as usize]))
    }

    pub fn active_flows(&self) -> impl Iterator<Item = &Flow> + '_ {
        self.on_path
            .iter()
            .flat_map(|ids| ids.iter())
            .map(move |id| &self.flows[id.0 as usize])
    }

    pub fn active_count(&self) -> usize {
        self.on_path.iter().map(BTreeSet::len).sum()
    }

    /// `R_p`: bandwidth consumed by the active flows on `path`.
    pub fn consumed_bandwidth(&self, path: PathId) -> Result<f64, NetworkError> {
        Ok(self.active_on(path)?.map(|f| f.allocation).sum())
    }

    /// `A_p = C_p - R_p`, clamped at zero.
    pub fn available_bandwidth(&self, path: PathId) -> Result<f64, NetworkError> {
        let c = self.path(path)?.capacity;
        Ok((c - self.consumed_bandwidth(path)?).max(0.0))
    }

    pub fn path_worth(&self, path: PathId) -> Result<f64, NetworkError> {
        Ok(self.active_on(path)?.map(Flow::worth).sum())
    }

    /// Sum of worth over active flows; closed sessions contribute nothing.
    pub fn total_worth(&self) -> f64 {
        self.active_flows().map(Flow::worth).sum()
    }

    /// Checks capacity and range constraints for every path and active flow.
    pub fn validate(&self, policy: ValidationPolicy) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        for path in &self.paths {
            let mut consumed = 0.0;
            for id in &self.on_path[path.id.0] {
                let f = &self.flows[id.0 as usize];
                if f.state != FlowState::Active || f.path != Some(path.id) {
                    out.push(Violation::Inconsistent {
                        flow: f.id,
                        detail: "indexed on a path but not active there",
                    });
                    continue;
                }
                consumed += f.allocation;
                if f.allocation.is_nan() || f.allocation < 0.0 {
                    out.push(Violation::NegativeAllocation {
                        flow: f.id,
                        allocation: f.allocation,
                    });
                    continue;
                }
                if policy.enforce_minimums && f.allocation < f.b_min() - TOLERANCE {
                    out.push(Violation::BelowMinimum {
                        flow: f.id,
                        path: path.id,
                        allocation: f.allocation,
                        minimum: f.b_min(),
                    });
                }
                let capped = policy.cap_elastic || f.class() != TrafficClass::Elastic;
                if capped && f.allocation > f.b_max() + TOLERANCE {
                    out.push(Violation::AboveMaximum {
                        flow: f.id,
                        path: path.id,
                        allocation: f.allocation,
                        maximum: f.b_max(),
                    });
                }
            }
            if consumed > path.capacity + TOLERANCE {
                out.push(Violation::CapacityExceeded {
                    path: path.id,
                    consumed,
                    capacity: path.capacity,
                });
            }
        }
        let indexed = self.active_count();
        let active = self.flows.iter().filter(|f| f.is_active()).count();
        if indexed != active {
            if let Some(f) = self.flows.iter().find(|f| {
                f.is_active() && f.path.is_none_or(|p| !self.on_path[p.0].contains(&f.id))
            }) {
                out.push(Violation::Inconsistent {
                    flow: f.id,
                    detail: "active but missing from its path index",
                });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Registers a new pending session arriving now.
    pub fn add_flow(&mut self, profile: &TrafficProfile, volume_mbit: f64) -> FlowId {
        let id = FlowId(self.flows.len() as u64);
        self.flows.push(Flow {
            id,
            profile_id: profile.id,
            priority: profile.priority,
            utility: profile.utility,
            arrival_time: self.now,
            end_time: None,
            total_volume: volume_mbit,
            remaining_volume: volume_mbit,
            transferred: 0.0,
            path: None,
            allocation: 0.0,
            state: FlowState::Pending,
            worth_integral: 0.0,
            utility_integral: 0.0,
        });
        id
    }

    fn transition(&mut self, id: FlowId, to: FlowState) -> Result<(), NetworkError> {
        let f = self.flow_mut(id)?;
        if !f.state.can_become(to) {
            return Err(NetworkError::IllegalTransition {
                flow: id,
                from: f.state,
                to,
            });
        }
        f.state = to;
        Ok(())
    }

    /// Places a pending flow on `path` with an initial allocation.
    pub fn activate(
        &mut self,
        id: FlowId,
        path: PathId,
        allocation: f64,
    ) -> Result<(), NetworkError> {
        self.path(path)?;
        check_allocation(id, allocation)?;
        self.transition(id, FlowState::Active)?;
        let f = self.flow_mut(id)?;
        f.path = Some(path);
        f.allocation = allocation;
        self.on_path[path.0].insert(id);
        Ok(())
    }

    pub fn reject(&mut self, id: FlowId) -> Result<(), NetworkError> {
        self.transition(id, FlowState::Rejected)?;
        let now = self.now;
        self.flow_mut(id)?.end_time = Some(now);
        Ok(())
    }

    pub fn set_allocation(&mut self, id: FlowId, allocation: f64) -> Result<(), NetworkError> {
        check_allocation(id, allocation)?;
        let f = self.flow_mut(id)?;
        if !f.is_active() {
            return Err(NetworkError::NotActive(id));
        }
        f.allocation = allocation;
        Ok(())
    }

    /// Removes an active flow from its path and closes the session with the
    /// given terminal state. Returns the path it left.
    pub fn close(&mut self, id: FlowId, end: FlowState) -> Result<PathId, NetworkError> {
        self.transition(id, end)?;
        let now = self.now;
        let f = self.flow_mut(id)?;
        let path = f.path.expect("active flows always have a path");
        f.end_time = Some(now);
        f.allocation = 0.0;
        if end == FlowState::Completed {
            f.remaining_volume = 0.0;
        }
        self.on_path[path.0].remove(&id);
        Ok(path)
    }

    /// Moves the clock to `t`, draining volume and accumulating worth at the
    /// current allocations.
    pub fn advance_to(&mut self, t: f64) -> Result<(), NetworkError> {
        if t < self.now {
            return Err(NetworkError::TimeReversal {
                now: self.now,
                to: t,
            });
        }
        let dt = t - self.now;
        if dt > 0.0 {
            for ids in &self.on_path {
                for id in ids {
                    let f = &mut self.flows[id.0 as usize];
                    let moved = f.allocation * dt;
                    f.transferred += moved;
                    f.remaining_volume = (f.remaining_volume - moved).max(0.0);
                    let u = f.utility.value(f.allocation);
                    f.utility_integral += u * dt;
                    f.worth_integral += f.priority.weight() * u * dt;
                }
            }
        }
        self.now = t;
        Ok(())
    }
}

fn check_allocation(flow: FlowId, value: f64) -> Result<(), NetworkError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(NetworkError::InvalidAllocation { flow, value })
    }
}
