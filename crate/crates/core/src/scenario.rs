//! Scenario and sweep files.
//!
//! Both are TOML. Unknown keys are rejected. A scenario names either a single
//! `capacity` or a list of `paths`, plus the workload and the scheme:
//!
//! ```toml
//! seed = 7
//! capacity = 2.0          # or: paths = [1.0, 1.0]
//! horizon_s = 20000.0
//! warmup_s = 2000.0       # default: 10% of the horizon
//!
//! [traffic]
//! rate_multiplier = 1.0
//! arrival_rates = [0.01, 0.001, 0.002, 0.01, 0.01, 0.002]
//! volume_distribution = "clamped-exponential"   # or "uniform"
//!
//! [scheme]
//! kind = "basmin"         # best-effort | complete-partitioning | trunk-reservation
//! delta = 0.01
//! eta = 0.9
//! rt_aggregate = "mean"   # or "minimum"
//!
//! [scheme.shares]
//! hrt = 0.1
//! rt = 0.4
//! elastic = 0.5
//! ```
//!
//! `[[traffic.profiles]]` tables replace the built-in profile set.

use std::fmt;
use std::path::Path as FsPath;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{BaselineError, PartitionShares, RtAggregate, TrunkReservationConfig};
use crate::basmin::{BasminConfig, BasminError};
use crate::network::{NetworkError, TrafficProfile};
use crate::profiles::builtin_profiles;
use crate::scheme::{SchemeKind, SchemeParams};

/// Per-profile arrival rates (flows/s) of the built-in workload, in profile
/// order. Offered load is about 1.54 Mbps.
pub const DEFAULT_ARRIVAL_RATES: [f64; 6] = [0.01, 0.001, 0.002, 0.01, 0.01, 0.002];
pub const DEFAULT_HORIZON_S: f64 = 20_000.0;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
}

impl From<toml::de::Error> for ConfigError {
    fn from(e: toml::de::Error) -> Self {
        ConfigError::Parse(e.to_string())
    }
}

impl From<BaselineError> for ConfigError {
    fn from(e: BaselineError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

impl From<BasminError> for ConfigError {
    fn from(e: BasminError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

impl From<NetworkError> for ConfigError {
    fn from(e: NetworkError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeDistribution {
    /// Exponential with mean at the middle of the profile's range, clamped
    /// into the range.
    #[default]
    ClampedExponential,
    Uniform,
}

/// A fully resolved scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Path capacities, Mbps.
    pub paths: Vec<f64>,
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub profiles: Vec<TrafficProfile>,
    /// Base arrival rate per profile, flows/s, before the multiplier.
    pub arrival_rates: Vec<f64>,
    pub rate_multiplier: f64,
    pub volume_distribution: VolumeDistribution,
    pub scheme: SchemeKind,
    pub params: SchemeParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: DEFAULT_SEED,
            paths: vec![2.0],
            horizon_s: DEFAULT_HORIZON_S,
            warmup_s: 0.1 * DEFAULT_HORIZON_S,
            profiles: builtin_profiles(),
            arrival_rates: DEFAULT_ARRIVAL_RATES.to_vec(),
            rate_multiplier: 1.0,
            volume_distribution: VolumeDistribution::default(),
            scheme: SchemeKind::Basmin,
            params: SchemeParams::default(),
        }
    }
}

impl ScenarioConfig {
    /// Arrival rate of profile slot `m` after the multiplier.
    pub fn effective_rate(&self, m: usize) -> f64 {
        self.arrival_rates[m] * self.rate_multiplier
    }

    pub fn total_capacity(&self) -> f64 {
        self.paths.iter().sum()
    }

    /// Rescales every path so that capacities sum to `total`, keeping their
    /// proportions.
    pub fn set_total_capacity(&mut self, total: f64) {
        let current = self.total_capacity();
        for c in &mut self.paths {
            *c *= total / current;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.paths.is_empty() {
            return Err(invalid("at least one path is required"));
        }
        for &c in &self.paths {
            if !(c.is_finite() && c > 0.0) {
                return Err(invalid(format!("path capacity must be positive, got {c}")));
            }
        }
        if !(self.horizon_s.is_finite() && self.horizon_s > 0.0) {
            return Err(invalid(format!(
                "horizon_s must be positive, got {}",
                self.horizon_s
            )));
        }
        if !(self.warmup_s >= 0.0 && self.warmup_s < self.horizon_s) {
            return Err(invalid(format!(
                "warmup_s must satisfy 0 <= warmup_s < horizon_s, got {}",
                self.warmup_s
            )));
        }
        if self.profiles.is_empty() {
            return Err(invalid("at least one traffic profile is required"));
        }
        let mut ids: Vec<u32> = self.profiles.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.profiles.len() {
            return Err(invalid("traffic profile ids must be unique"));
        }
        for p in &self.profiles {
            p.validate()?;
        }
        if self.arrival_rates.len() != self.profiles.len() {
            return Err(invalid(format!(
                "arrival_rates has {} entries but there are {} profiles",
                self.arrival_rates.len(),
                self.profiles.len()
            )));
        }
        for &r in &self.arrival_rates {
            if !(r.is_finite() && r >= 0.0) {
                return Err(invalid(format!(
                    "arrival rates must be non-negative, got {r}"
                )));
            }
        }
        if !(self.rate_multiplier.is_finite() && self.rate_multiplier >= 0.0) {
            return Err(invalid(format!(
                "rate_multiplier must be non-negative, got {}",
                self.rate_multiplier
            )));
        }
        self.params
            .basmin
            .validate_for(self.profiles.iter().map(|p| &p.utility))?;
        self.params.shares.validate()?;
        self.params.trunk.validate()?;
        Ok(())
    }

    /// Serializes every field explicitly; [`ScenarioConfig::from_toml`]
    /// reads it back to an equal value.
    pub fn to_toml(&self) -> String {
        let file = ScenarioFile::from(self);
        toml::to_string(&file).expect("scenario files always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file: ScenarioFile = toml::from_str(text)?;
        file.resolve()
    }
}

/// Reads, resolves and validates a scenario file.
pub fn load_scenario(path: impl AsRef<FsPath>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::from_toml(&text)
}

/// A scenario fragment holding only `[[traffic.profiles]]` tables.
pub fn profiles_toml(profiles: &[TrafficProfile]) -> String {
    let file = ScenarioFile {
        traffic: TrafficSection {
            profiles: Some(profiles.to_vec()),
            ..Default::default()
        },
        ..Default::default()
    };
    toml::to_string(&file).expect("profiles always serialize")
}

/// On-disk form of a scenario; every field except the capacity is optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup_s: Option<f64>,
    #[serde(default)]
    pub traffic: TrafficSection,
    #[serde(default)]
    pub scheme: SchemeSection,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_distribution: Option<VolumeDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<TrafficProfile>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SchemeKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rt_aggregate: Option<RtAggregate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shares: Option<PartitionShares>,
}

impl ScenarioFile {
    pub fn resolve(self) -> Result<ScenarioConfig, ConfigError> {
        let d = ScenarioConfig::default();
        let paths = match (self.capacity, self.paths) {
            (Some(_), Some(_)) => {
                return Err(invalid("set either `capacity` or `paths`, not both"))
            }
            (Some(c), None) => vec![c],
            (None, Some(p)) => p,
            (None, None) => return Err(invalid("missing `capacity` (or `paths`)")),
        };
        let horizon_s = self.horizon_s.unwrap_or(d.horizon_s);
        let profiles = self.traffic.profiles.unwrap_or(d.profiles);
        let arrival_rates = match self.traffic.arrival_rates {
            Some(r) => r,
            None if profiles.len() == DEFAULT_ARRIVAL_RATES.len() => DEFAULT_ARRIVAL_RATES.to_vec(),
            None => {
                return Err(invalid(
                    "custom profiles need explicit `traffic.arrival_rates`",
                ))
            }
        };
        let basmin = BasminConfig {
            delta: self.scheme.delta.unwrap_or(d.params.basmin.delta),
            max_iterations: self
                .scheme
                .max_iterations
                .unwrap_or(d.params.basmin.max_iterations),
        };
        let trunk = TrunkReservationConfig {
            eta: self.scheme.eta.unwrap_or(d.params.trunk.eta),
            aggregate: self.scheme.rt_aggregate.unwrap_or(d.params.trunk.aggregate),
        };
        let config = ScenarioConfig {
            seed: self.seed.unwrap_or(d.seed),
            paths,
            horizon_s,
            warmup_s: self.warmup_s.unwrap_or(0.1 * horizon_s),
            profiles,
            arrival_rates,
            rate_multiplier: self.traffic.rate_multiplier.unwrap_or(d.rate_multiplier),
            volume_distribution: self.traffic.volume_distribution.unwrap_or_default(),
            scheme: self.scheme.kind.unwrap_or(d.scheme),
            params: SchemeParams {
                basmin,
                shares: self.scheme.shares.unwrap_or(d.params.shares),
                trunk,
            },
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<&ScenarioConfig> for ScenarioFile {
    fn from(c: &ScenarioConfig) -> Self {
        let (capacity, paths) = if c.paths.len() == 1 {
            (Some(c.paths[0]), None)
        } else {
            (None, Some(c.paths.clone()))
        };
        ScenarioFile {
            seed: Some(c.seed),
            capacity,
            paths,
            horizon_s: Some(c.horizon_s),
            warmup_s: Some(c.warmup_s),
            traffic: TrafficSection {
                rate_multiplier: Some(c.rate_multiplier),
                arrival_rates: Some(c.arrival_rates.clone()),
                volume_distribution: Some(c.volume_distribution),
                profiles: Some(c.profiles.clone()),
            },
            scheme: SchemeSection {
                kind: Some(c.scheme),
                delta: Some(c.params.basmin.delta),
                max_iterations: Some(c.params.basmin.max_iterations),
                eta: Some(c.params.trunk.eta),
                rt_aggregate: Some(c.params.trunk.aggregate),
                shares: Some(c.params.shares),
            },
        }
    }
}

/// Quantity varied across a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Sum of path capacities, Mbps; paths keep their proportions.
    TotalCapacity,
    /// Uniform factor on every profile's arrival rate.
    ArrivalRateMultiplier,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::TotalCapacity => "total_capacity",
            SweepParam::ArrivalRateMultiplier => "arrival_rate_multiplier",
        }
    }

    pub fn apply(self, config: &mut ScenarioConfig, value: f64) {
        match self {
            SweepParam::TotalCapacity => config.set_total_capacity(value),
            SweepParam::ArrivalRateMultiplier => config.rate_multiplier = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A grid of scenario variants, each run for every scheme and replication.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub param: SweepParam,
    pub values: Vec<f64>,
    /// Replication `r` runs with seed `base.seed + r`.
    pub replications: u32,
    pub schemes: Vec<SchemeKind>,
    pub base: ScenarioConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.values.is_empty() {
            return Err(invalid("sweep grid must not be empty"));
        }
        if self.replications == 0 {
            return Err(invalid("replications must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("at least one scheme is required"));
        }
        for &v in &self.values {
            let ok = match self.param {
                SweepParam::TotalCapacity => v.is_finite() && v > 0.0,
                SweepParam::ArrivalRateMultiplier => v.is_finite() && v >= 0.0,
            };
            if !ok {
                return Err(invalid(format!("invalid {} value {v}", self.param)));
            }
        }
        self.base.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file: SweepFile = toml::from_str(text)?;
        let spec = SweepSpec {
            name: file.experiment.unwrap_or_else(|| "sweep".to_owned()),
            param: file.param,
            values: file.values,
            replications: file.replications.unwrap_or(5),
            schemes: file.schemes.unwrap_or_else(|| SchemeKind::ALL.to_vec()),
            base: file.base.resolve()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Built-in experiment by name.
    pub fn builtin(name: &str) -> Result<Self, ConfigError> {
        name.parse::<Experiment>()
            .map(Experiment::spec)
            .map_err(ConfigError::Invalid)
    }
}

pub fn load_sweep(path: impl AsRef<FsPath>) -> Result<SweepSpec, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    SweepSpec::from_toml(&text)
}

/// On-disk form of a sweep; `[base]` is a scenario table.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    #[serde(default)]
    experiment: Option<String>,
    param: SweepParam,
    values: Vec<f64>,
    #[serde(default)]
    replications: Option<u32>,
    #[serde(default)]
    schemes: Option<Vec<SchemeKind>>,
    base: ScenarioFile,
}

/// Arrival-rate multiplier that keeps every capacity point up to 10 Mbps
/// overloaded under the default rates.
pub const OVERLOAD_MULTIPLIER: f64 = 8.0;
/// Rate multipliers for the 2 Mbps sweeps; all of them overload the path.
pub const RATE_GRID: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 3.5];
pub const CAPACITY_GRID: [f64; 6] = [1.0, 2.0, 4.0, 6.0, 8.0, 10.0];
/// Horizon used by the built-in sweeps, seconds.
pub const EXPERIMENT_HORIZON_S: f64 = 5_000.0;

/// The three built-in comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Time-averaged total worth as total capacity grows, under overload.
    WorthVsCapacity,
    /// Mean connection worth as arrival rate grows on a 2 Mbps path.
    ConnworthVsRate,
    /// Mean link utilization as arrival rate grows on a 2 Mbps path.
    UtilizationVsRate,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [
        Experiment::WorthVsCapacity,
        Experiment::ConnworthVsRate,
        Experiment::UtilizationVsRate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::WorthVsCapacity => "worth_vs_capacity",
            Experiment::ConnworthVsRate => "connworth_vs_rate",
            Experiment::UtilizationVsRate => "utilization_vs_rate",
        }
    }

    pub fn spec(self) -> SweepSpec {
        let mut base = ScenarioConfig {
            horizon_s: EXPERIMENT_HORIZON_S,
            warmup_s: 0.1 * EXPERIMENT_HORIZON_S,
            ..Default::default()
        };
        let (param, values) = match self {
            Experiment::WorthVsCapacity => {
                base.rate_multiplier = OVERLOAD_MULTIPLIER;
                (SweepParam::TotalCapacity, CAPACITY_GRID.to_vec())
            }
            Experiment::ConnworthVsRate | Experiment::UtilizationVsRate => {
                (SweepParam::ArrivalRateMultiplier, RATE_GRID.to_vec())
            }
        };
        SweepSpec {
            name: self.as_str().to_owned(),
            param,
            values,
            replications: 5,
            schemes: SchemeKind::ALL.to_vec(),
            base,
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| {
                format!("unknown experiment `{s}` (expected worth_vs_capacity, connworth_vs_rate or utilization_vs_rate)")
            })
    }
}
