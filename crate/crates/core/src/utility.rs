//! Utility curves, their slopes, and the priority-weighted worth metric.
//!
//! Bandwidths are in Mbps throughout. A utility maps an allocated rate to a
//! satisfaction level in `[0, 1]`; worth scales that level by the weight of
//! the flow's priority level, `2^i`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UtilityError {
    #[error("bandwidth must be non-negative, got {0}")]
    NegativeBandwidth(f64),
    #[error("utility must lie in [0, 1], got {0}")]
    UtilityOutOfRange(f64),
    #[error("priority level must be in 1..=4, got {0}")]
    InvalidPriority(u8),
    #[error("invalid utility parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// The three traffic families a utility curve can belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrafficClass {
    HardRealTime,
    RealTime,
    Elastic,
}

impl TrafficClass {
    pub const ALL: [TrafficClass; 3] = [
        TrafficClass::HardRealTime,
        TrafficClass::RealTime,
        TrafficClass::Elastic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrafficClass::HardRealTime => "hard-real-time",
            TrafficClass::RealTime => "real-time",
            TrafficClass::Elastic => "elastic",
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A closed-form utility curve together with its bandwidth range.
///
/// * `Elastic`: `1 - exp(-k b / scale)`, allocated in `[0, b_max]`. `scale`
///   is the exponent denominator; it defaults to `b_max` but may differ (the
///   bulk file-transfer profile uses `b_max = 5` with denominator 10).
/// * `HardRealTime`: a step, `1` once `b >= b_max`, `0` below. Its range is the
///   single point `b_max`.
/// * `RealTime`: `1 - exp(-k1 b^2 / (k2 + b))`, allocated in `[b_min, b_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum UtilityFunction {
    Elastic {
        k: f64,
        b_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
    HardRealTime {
        b_max: f64,
    },
    RealTime {
        k1: f64,
        k2: f64,
        b_min: f64,
        b_max: f64,
    },
}

fn positive(name: &'static str, value: f64) -> Result<(), UtilityError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(UtilityError::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

fn check_bandwidth(b: f64) -> Result<(), UtilityError> {
    if b >= 0.0 {
        Ok(())
    } else {
        Err(UtilityError::NegativeBandwidth(b))
    }
}

impl UtilityFunction {
    pub fn elastic(k: f64, b_max: f64) -> Result<Self, UtilityError> {
        let u = UtilityFunction::Elastic {
            k,
            b_max,
            scale: None,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn elastic_with_scale(k: f64, b_max: f64, scale: f64) -> Result<Self, UtilityError> {
        let u = UtilityFunction::Elastic {
            k,
            b_max,
            scale: Some(scale),
        };
        u.validate()?;
        Ok(u)
    }

    pub fn hard_real_time(b_max: f64) -> Result<Self, UtilityError> {
        let u = UtilityFunction::HardRealTime { b_max };
        u.validate()?;
        Ok(u)
    }

    pub fn real_time(k1: f64, k2: f64, b_min: f64, b_max: f64) -> Result<Self, UtilityError> {
        let u = UtilityFunction::RealTime {
            k1,
            k2,
            b_min,
            b_max,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<(), UtilityError> {
        match *self {
            UtilityFunction::Elastic { k, b_max, scale } => {
                positive("k", k)?;
                positive("b_max", b_max)?;
                if let Some(s) = scale {
                    positive("scale", s)?;
                }
                Ok(())
            }
            UtilityFunction::HardRealTime { b_max } => positive("b_max", b_max),
            UtilityFunction::RealTime {
                k1,
                k2,
                b_min,
                b_max,
            } => {
                positive("k1", k1)?;
                positive("k2", k2)?;
                positive("b_min", b_min)?;
                positive("b_max", b_max)?;
                if b_min > b_max {
                    return Err(UtilityError::InvalidParameter {
                        name: "b_min",
                        value: b_min,
                        reason: "must not exceed b_max",
                    });
                }
                Ok(())
            }
        }
    }

    pub fn class(&self) -> TrafficClass {
        match self {
            UtilityFunction::Elastic { .. } => TrafficClass::Elastic,
            UtilityFunction::HardRealTime { .. } => TrafficClass::HardRealTime,
            UtilityFunction::RealTime { .. } => TrafficClass::RealTime,
        }
    }

    /// Lower end of the admissible range: 0 for elastic, `b_max` for HRT.
    pub fn b_min(&self) -> f64 {
        match *self {
            UtilityFunction::Elastic { .. } => 0.0,
            UtilityFunction::HardRealTime { b_max } => b_max,
            UtilityFunction::RealTime { b_min, .. } => b_min,
        }
    }

    pub fn b_max(&self) -> f64 {
        match *self {
            UtilityFunction::Elastic { b_max, .. }
            | UtilityFunction::HardRealTime { b_max }
            | UtilityFunction::RealTime { b_max, .. } => b_max,
        }
    }

    /// Utility at rate `b`. Defined above `b_max` too; callers enforce caps.
    pub fn evaluate(&self, b: f64) -> Result<f64, UtilityError> {
        check_bandwidth(b)?;
        Ok(self.value(b))
    }

    /// Slope of the utility curve at `b`. The HRT step has slope 0 everywhere.
    pub fn derivative(&self, b: f64) -> Result<f64, UtilityError> {
        check_bandwidth(b)?;
        Ok(self.slope(b))
    }

    pub(crate) fn value(&self, b: f64) -> f64 {
        match *self {
            UtilityFunction::Elastic { k, b_max, scale } => {
                let s = scale.unwrap_or(b_max);
                -(-k * b / s).exp_m1()
            }
            UtilityFunction::HardRealTime { b_max } => {
                if b >= b_max {
                    1.0
                } else {
                    0.0
                }
            }
            UtilityFunction::RealTime { k1, k2, .. } => -(-k1 * b * b / (k2 + b)).exp_m1(),
        }
    }

    pub(crate) fn slope(&self, b: f64) -> f64 {
        match *self {
            UtilityFunction::Elastic { k, b_max, scale } => {
                let s = scale.unwrap_or(b_max);
                (k / s) * (-k * b / s).exp()
            }
            UtilityFunction::HardRealTime { .. } => 0.0,
            UtilityFunction::RealTime { k1, k2, .. } => {
                let d = k2 + b;
                (-k1 * b * b / d).exp() * k1 * (b * b + 2.0 * k2 * b) / (d * d)
            }
        }
    }
}

/// Priority level `i` in `1..=4`; higher outranks lower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PriorityLevel(u8);

impl PriorityLevel {
    pub const MIN: PriorityLevel = PriorityLevel(1);
    pub const MAX: PriorityLevel = PriorityLevel(4);

    pub fn new(level: u8) -> Result<Self, UtilityError> {
        if (1..=4).contains(&level) {
            Ok(PriorityLevel(level))
        } else {
            Err(UtilityError::InvalidPriority(level))
        }
    }

    pub fn level(self) -> u8 {
        self.0
    }

    /// `2^i`.
    pub fn weight(self) -> f64 {
        f64::from(1u32 << self.0)
    }
}

impl TryFrom<u8> for PriorityLevel {
    type Error = UtilityError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        PriorityLevel::new(value)
    }
}

impl From<PriorityLevel> for u8 {
    fn from(p: PriorityLevel) -> u8 {
        p.0
    }
}

impl fmt::Display for PriorityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Worth of a flow at utility `u`: `2^i * u`.
pub fn worth(priority: PriorityLevel, u: f64) -> Result<f64, UtilityError> {
    if !(0.0..=1.0).contains(&u) {
        return Err(UtilityError::UtilityOutOfRange(u));
    }
    Ok(priority.weight() * u)
}

/// Worth gained per extra Mbps at rate `b`: `2^i * U'(b)`.
pub fn marginal_worth(
    priority: PriorityLevel,
    utility: &UtilityFunction,
    b: f64,
) -> Result<f64, UtilityError> {
    Ok(priority.weight() * utility.derivative(b)?)
}

/// Worth of a flow with the given curve and priority at rate `b`.
pub(crate) fn worth_at(priority: PriorityLevel, utility: &UtilityFunction, b: f64) -> f64 {
    priority.weight() * utility.value(b.max(0.0))
}
