//! Priority-weighted, utility-based bandwidth allocation (BASMIN) with three
//! comparison schemes, a flow-level simulator and experiment sweeps.

pub mod baselines;
pub mod basmin;
pub mod experiment;
pub mod network;
pub mod output;
pub mod profiles;
pub mod scenario;
pub mod scheme;
pub mod sim;
pub mod utility;

pub use baselines::{
    BestEffort, CompletePartitioning, PartitionShares, TrunkReservation, TrunkReservationConfig,
};
pub use basmin::{Basmin, BasminConfig, BasminError};
pub use experiment::{run_sweep, summarize, SweepRow};
pub use network::{
    Flow, FlowId, FlowState, NetworkError, NetworkState, Path, PathId, TrafficProfile,
    ValidationPolicy,
};
pub use profiles::builtin_profiles;
pub use scenario::{load_scenario, ScenarioConfig, SweepSpec};
pub use scheme::{ArrivalOutcome, Scheme, SchemeError, SchemeKind, SchemeParams};
pub use sim::{run, SimReport};
pub use utility::{PriorityLevel, TrafficClass, UtilityFunction};
