//! Sensor decision rules, fusion rules and bandwidth schedules for the five
//! one-bit protocols.

mod family;
mod fusion;
mod rules;
mod schedule;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::Point;
use crate::scenario::{Example, Task};

pub use family::{LipschitzFusionSpec, ResponseFamily};
pub use fusion::{
    fuse_cls_abstain, fuse_cls_noabstain, fuse_reg_abstain, fuse_reg_noabstain_scaledmean, fuse_specialist, Fused,
    VoteTally,
};
pub use rules::{
    assign_specialist_regions, reg_abstain_vote_probability, respond_cls_abstain, respond_cls_noabstain,
    respond_reg_abstain, respond_reg_noabstain, respond_specialist,
};
pub use schedule::{validate_schedule, Schedule, Verdict};

/// Binary class label, 0 or 1.
pub type Label = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Vote the stored label if the query is in the ball, else abstain.
    ClsAbstain,
    /// Vote the stored label in the ball, otherwise vote a fair coin.
    ClsNoAbstain,
    /// Biased-coin quantization of the real label, abstain outside the ball.
    RegAbstain,
    /// One bit from a response-probability family, no abstention.
    RegNoAbstain,
    /// Sensors specialize on random regions and answer only inside them.
    Specialists,
}

impl Protocol {
    pub const ALL: [Protocol; 5] =
        [Self::ClsAbstain, Self::ClsNoAbstain, Self::RegAbstain, Self::RegNoAbstain, Self::Specialists];

    pub fn id(self) -> &'static str {
        match self {
            Self::ClsAbstain => "cls_abstain",
            Self::ClsNoAbstain => "cls_noabstain",
            Self::RegAbstain => "reg_abstain",
            Self::RegNoAbstain => "reg_noabstain",
            Self::Specialists => "specialists",
        }
    }

    pub fn task(self) -> Task {
        match self {
            Self::RegAbstain | Self::RegNoAbstain => Task::Regression,
            _ => Task::Classification,
        }
    }

    /// Whether sensors may stay silent.
    pub fn allows_abstention(self) -> bool {
        matches!(self, Self::ClsAbstain | Self::RegAbstain | Self::Specialists)
    }

    /// Size of the response alphabet.
    pub fn alphabet_size(self) -> u32 {
        if self.allows_abstention() {
            3
        } else {
            2
        }
    }

    /// Bits per sensor per query: `log2` of the alphabet size.
    pub fn bits_per_query(self) -> f64 {
        f64::from(self.alphabet_size()).log2()
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL.into_iter().find(|p| p.id() == s.trim()).ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}

/// Lifetime of the guessing coin in the classification protocol without
/// abstention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinMode {
    /// One coin per sensor, drawn at training and reused for every query.
    #[default]
    PerSensor,
    /// A fresh coin for every (sensor, query).
    PerQuery,
}

impl CoinMode {
    pub fn id(self) -> &'static str {
        match self {
            Self::PerSensor => "per_sensor",
            Self::PerQuery => "per_query",
        }
    }
}

impl FromStr for CoinMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "per_sensor" => Ok(Self::PerSensor),
            "per_query" => Ok(Self::PerQuery),
            other => Err(Error::Config(format!("coin_mode: expected per_sensor or per_query, got `{other}`"))),
        }
    }
}

/// A sensor's answer to one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensorResponse {
    Vote1,
    Vote0,
    Abstain,
}

impl SensorResponse {
    pub fn vote(bit: bool) -> Self {
        if bit {
            Self::Vote1
        } else {
            Self::Vote0
        }
    }

    pub fn from_label(y: f64) -> Self {
        Self::vote(y >= 0.5)
    }

    pub fn is_abstain(self) -> bool {
        self == Self::Abstain
    }
}

/// What one sensor stores after training.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorState {
    /// `None` when the sensor could not be trained.
    pub datum: Option<Example>,
    /// Center of the region of specialization.
    pub region_center: Option<Point>,
    /// Per-sensor coin realization.
    pub fixed_coin: Option<bool>,
}

impl SensorState {
    pub fn trained(datum: Example) -> Self {
        Self { datum: Some(datum), ..Self::default() }
    }

    pub fn with_coin(mut self, coin: bool) -> Self {
        self.fixed_coin = Some(coin);
        self
    }

    pub fn with_region(mut self, center: Point) -> Self {
        self.region_center = Some(center);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.id().parse::<Protocol>().unwrap(), p);
        }
        assert!("cls".parse::<Protocol>().is_err());
    }

    #[test]
    fn bit_accounting() {
        assert!((Protocol::ClsAbstain.bits_per_query() - 1.58496).abs() < 1e-5);
        assert!((Protocol::Specialists.bits_per_query() - 3f64.log2()).abs() < 1e-15);
        assert_eq!(Protocol::ClsNoAbstain.bits_per_query(), 1.0);
        assert_eq!(Protocol::RegNoAbstain.bits_per_query(), 1.0);
    }
}
