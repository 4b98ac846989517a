use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::within;

/// Response-probability functions `a(x, X_i, Y_i) -> [0, 1]` for the
/// regression protocol without abstention. A sensor votes 1 with
/// probability `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResponseFamily {
    /// `clip(Y_i / (2c) + 1/2, 0, 1)` when `||x - X_i|| <= radius`, else `1/2`.
    ClippedLocal { c: f64, radius: f64 },
    /// `a` identically equal to the given probability.
    Constant(f64),
}

impl ResponseFamily {
    #[inline]
    pub fn probability(&self, x: &[f64], xi: &[f64], yi: f64) -> f64 {
        match *self {
            Self::ClippedLocal { c, radius } => {
                if within(x, xi, radius) {
                    (yi / (2.0 * c) + 0.5).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            }
            Self::Constant(p) => p,
        }
    }

    /// `(radius, p)` when `a(x, X_i, Y_i) = p` for every sensor farther
    /// than `radius` from `x`. Networks use this to aggregate the votes of
    /// far-away sensors in one draw.
    pub fn background(&self) -> Option<(f64, f64)> {
        match *self {
            Self::ClippedLocal { radius, .. } => Some((radius, 0.5)),
            Self::Constant(_) => None,
        }
    }
}

/// A response family paired with the scaled-mean fusion constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzFusionSpec {
    family: ResponseFamily,
    scale: f64,
}

impl LipschitzFusionSpec {
    /// Registers `family` for fusion with `eta = 2c (mean vote - 1/2)`.
    /// Rejects parameters that would produce probabilities outside `[0, 1]`.
    pub fn new(family: ResponseFamily, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("fusion scale c must be finite and > 0, got {scale}")));
        }
        match family {
            ResponseFamily::ClippedLocal { c, radius } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("family c must be finite and > 0, got {c}")));
                }
                if !(radius >= 0.0 && radius.is_finite()) {
                    return Err(Error::Config(format!("family radius must be finite and >= 0, got {radius}")));
                }
            }
            ResponseFamily::Constant(p) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::FamilyRange(p));
                }
            }
        }
        Ok(Self { family, scale })
    }

    /// Default family at bandwidth `r_n` with fixed `c`, fused with the same `c`.
    pub fn clipped_local(c: f64, r_n: f64) -> Result<Self> {
        Self::new(ResponseFamily::ClippedLocal { c, radius: r_n }, c)
    }

    pub fn family(&self) -> &ResponseFamily {
        &self.family
    }

    /// Fusion constant `c`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Lipschitz constant of the fusion rule in average Hamming distance.
    pub fn lipschitz_c(&self) -> f64 {
        2.0 * self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipped_local_values() {
        let f = ResponseFamily::ClippedLocal { c: 2.0, radius: 0.1 };
        assert_eq!(f.probability(&[0.9], &[0.1], 1.0), 0.5);
        assert_eq!(f.probability(&[0.1], &[0.15], 5.0), 1.0);
        assert_eq!(f.probability(&[0.1], &[0.15], -5.0), 0.0);
        assert_eq!(f.probability(&[0.1], &[0.15], 1.0), 0.75);
    }

    #[test]
    fn registration_checks_range() {
        assert_eq!(LipschitzFusionSpec::new(ResponseFamily::Constant(1.5), 1.0), Err(Error::FamilyRange(1.5)));
        assert!(LipschitzFusionSpec::new(ResponseFamily::Constant(0.0), 1.0).is_ok());
        assert!(LipschitzFusionSpec::clipped_local(0.0, 0.1).is_err());
        assert_eq!(LipschitzFusionSpec::clipped_local(2.0, 0.1).unwrap().lipschitz_c(), 4.0);
    }
}
