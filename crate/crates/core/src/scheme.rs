//! The interface every allocation scheme implements, and scheme selection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    BestEffort, CompletePartitioning, PartitionShares, TrunkReservation, TrunkReservationConfig,
};
use crate::basmin::{Basmin, BasminConfig, BasminError};
use crate::network::{FlowId, NetworkError, NetworkState, PathId, ValidationPolicy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Basmin(#[from] BasminError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArrivalOutcome {
    Admitted {
        path: PathId,
        /// Flows terminated to make room, ascending by id.
        preempted: Vec<FlowId>,
    },
    Rejected,
}

impl ArrivalOutcome {
    pub fn is_admitted(&self) -> bool {
        matches!(self, ArrivalOutcome::Admitted { .. })
    }
}

/// A bandwidth allocation policy driven by arrivals and departures.
///
/// `on_arrival` receives a pending flow and must either activate or reject
/// it. `on_departure` receives an active flow whose volume is exhausted; it
/// closes the session and redistributes the freed bandwidth.
pub trait Scheme: Send {
    fn kind(&self) -> SchemeKind;

    /// Range constraints this scheme guarantees after every operation.
    fn validation_policy(&self) -> ValidationPolicy;

    fn on_arrival(
        &mut self,
        state: &mut NetworkState,
        flow: FlowId,
    ) -> Result<ArrivalOutcome, SchemeError>;

    fn on_departure(&mut self, state: &mut NetworkState, flow: FlowId) -> Result<(), SchemeError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Basmin,
    BestEffort,
    CompletePartitioning,
    TrunkReservation,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Basmin,
        SchemeKind::BestEffort,
        SchemeKind::CompletePartitioning,
        SchemeKind::TrunkReservation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Basmin => "basmin",
            SchemeKind::BestEffort => "best-effort",
            SchemeKind::CompletePartitioning => "complete-partitioning",
            SchemeKind::TrunkReservation => "trunk-reservation",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown scheme `{s}` (expected one of basmin, best-effort, complete-partitioning, trunk-reservation)"
                )
            })
    }
}

/// Parameters for every scheme; each scheme reads only its own.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SchemeParams {
    pub basmin: BasminConfig,
    pub shares: PartitionShares,
    pub trunk: TrunkReservationConfig,
}

pub fn build(kind: SchemeKind, params: &SchemeParams) -> Box<dyn Scheme> {
    match kind {
        SchemeKind::Basmin => Box::new(Basmin::new(params.basmin)),
        SchemeKind::BestEffort => Box::new(BestEffort),
        SchemeKind::CompletePartitioning => Box::new(CompletePartitioning::new(params.shares)),
        SchemeKind::TrunkReservation => Box::new(TrunkReservation::new(params.trunk)),
    }
}
