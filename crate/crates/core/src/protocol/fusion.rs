//! Fusion rules. Each rule depends on the responses only through their
//! counts, so all of them are permutation invariant.

use serde::{Deserialize, Serialize};

use super::{Label, SensorResponse};
use crate::error::{Error, Result};

/// A fused prediction plus whether no sensor voted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fused<T> {
    pub value: T,
    pub all_abstain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VoteTally {
    pub ones: u64,
    pub zeros: u64,
    pub abstains: u64,
}

impl VoteTally {
    pub fn from_responses<'a>(responses: impl IntoIterator<Item = &'a SensorResponse>) -> Self {
        let mut t = Self::default();
        for &r in responses {
            t.add(r);
        }
        t
    }

    #[inline]
    pub fn add(&mut self, r: SensorResponse) {
        match r {
            SensorResponse::Vote1 => self.ones += 1,
            SensorResponse::Vote0 => self.zeros += 1,
            SensorResponse::Abstain => self.abstains += 1,
        }
    }

    /// Number of sensors that voted.
    pub fn voters(&self) -> u64 {
        self.ones + self.zeros
    }

    pub fn total(&self) -> u64 {
        self.voters() + self.abstains
    }

    /// Majority among voters with ties going to 1; `default` when nobody votes.
    pub fn majority_at_least_half(&self, default: Label) -> Fused<Label> {
        if self.voters() == 0 {
            return Fused { value: default, all_abstain: true };
        }
        Fused { value: Label::from(self.ones >= self.zeros), all_abstain: false }
    }

    /// Majority with ties going to 0. Requires that nobody abstained.
    pub fn strict_majority(&self) -> Result<Fused<Label>> {
        self.reject_abstentions()?;
        Ok(Fused { value: Label::from(2 * self.ones > self.total()), all_abstain: self.total() == 0 })
    }

    /// `2c (V/M - 1/2)` over the `M` voters; 0 when nobody votes.
    pub fn scaled_mean(&self, c: f64) -> Fused<f64> {
        let m = self.voters();
        if m == 0 {
            return Fused { value: 0.0, all_abstain: true };
        }
        Fused { value: 2.0 * c * (self.ones as f64 / m as f64 - 0.5), all_abstain: false }
    }

    fn reject_abstentions(&self) -> Result<()> {
        if self.abstains > 0 {
            return Err(Error::ProtocolViolation(format!(
                "{} abstentions reached a fusion rule without abstention",
                self.abstains
            )));
        }
        Ok(())
    }
}

/// Majority vote among non-abstaining sensors, `>= 1/2` deciding 1.
pub fn fuse_cls_abstain(responses: &[SensorResponse], default: Label) -> Fused<Label> {
    VoteTally::from_responses(responses).majority_at_least_half(default)
}

/// Majority vote over all sensors; the mean must strictly exceed 1/2.
pub fn fuse_cls_noabstain(responses: &[SensorResponse]) -> Result<Fused<Label>> {
    VoteTally::from_responses(responses).strict_majority()
}

/// Shifted and scaled average vote of the non-abstaining sensors.
pub fn fuse_reg_abstain(responses: &[SensorResponse], c_n: f64) -> Fused<f64> {
    VoteTally::from_responses(responses).scaled_mean(c_n)
}

/// `2c (mean vote - 1/2)` over all `n` sensors. Lipschitz in the average
/// Hamming distance with constant `2c`.
pub fn fuse_reg_noabstain_scaledmean(responses: &[SensorResponse], c: f64) -> Result<Fused<f64>> {
    let t = VoteTally::from_responses(responses);
    t.reject_abstentions()?;
    Ok(t.scaled_mean(c))
}

/// Majority vote among the `Lambda(x)` specialists whose region holds the query.
pub fn fuse_specialist(responses: &[SensorResponse], default: Label) -> Fused<Label> {
    VoteTally::from_responses(responses).majority_at_least_half(default)
}
