use serde::{Deserialize, Serialize};

use super::Protocol;
use crate::error::{Error, Result};

/// Power-law bandwidth and scaling sequences
/// `r_n = r0 * n^(-beta)` and `c_n = c0 * n^gamma` (or a fixed `clamp`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub r0: f64,
    pub beta: f64,
    pub c0: f64,
    pub gamma: f64,
    /// Fixed `c_n` for labels with a known bound.
    pub clamp: Option<f64>,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { r0: 0.5, beta: 0.3, c0: 1.0, gamma: 0.0, clamp: None }
    }
}

impl Schedule {
    pub fn new(r0: f64, beta: f64, c0: f64, gamma: f64, clamp: Option<f64>) -> Result<Self> {
        let s = Self { r0, beta, c0, gamma, clamp };
        s.check()?;
        Ok(s)
    }

    pub fn bandwidth(r0: f64, beta: f64) -> Result<Self> {
        Self::new(r0, beta, 1.0, 0.0, None)
    }

    pub fn check(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Schedule(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Schedule(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        pos("r0", self.r0)?;
        nonneg("beta", self.beta)?;
        pos("c0", self.c0)?;
        nonneg("gamma", self.gamma)?;
        if let Some(c) = self.clamp {
            pos("clamp", c)?;
        }
        Ok(())
    }

    pub fn r_n(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        self.r0 * (n as f64).powf(-self.beta)
    }

    pub fn c_n(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        self.clamp.unwrap_or_else(|| self.c0 * (n as f64).powf(self.gamma))
    }

    /// `(r_n, c_n)` for a network of `n >= 1` sensors.
    pub fn eval(&self, n: u64) -> Result<(f64, f64)> {
        if n == 0 {
            return Err(Error::Schedule("schedules are defined for n >= 1".into()));
        }
        Ok((self.r_n(n), self.c_n(n)))
    }
}

/// Outcome of checking a schedule against a protocol's sufficient
/// conditions for consistency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    SatisfiesSufficientConditions,
    /// Not covered by the sufficient conditions. This does not by itself
    /// mean the network is inconsistent.
    ViolatesSufficientConditions(String),
    /// No fusion rule of the admissible class is universally consistent.
    AlwaysInconsistent,
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::SatisfiesSufficientConditions => "satisfies",
            Self::ViolatesSufficientConditions(_) => "violates",
            Self::AlwaysInconsistent => "always_inconsistent",
        }
    }

    pub fn is_satisfied(&self) -> bool {
        matches!(self, Self::SatisfiesSufficientConditions)
    }
}

/// Decides the limit conditions on the power-law exponents.
///
/// With `r_n = r0 n^-beta` and `c_n = c0 n^gamma`:
/// `r_n -> 0` iff `beta > 0`; `r_n^d n -> inf` iff `beta d < 1`;
/// `r_n^d sqrt(n) -> inf` iff `beta d < 1/2`;
/// `c_n^2 / (n r_n^d) -> 0` iff `2 gamma + beta d < 1`.
pub fn validate_schedule(schedule: &Schedule, protocol: Protocol, d: usize) -> Verdict {
    use Verdict::*;
    let bd = schedule.beta * d as f64;
    let shrink = || {
        if schedule.beta > 0.0 {
            None
        } else {
            Some("beta = 0: r_n does not shrink to 0".to_string())
        }
    };
    let below = |limit: f64, label: &str| {
        if bd < limit {
            None
        } else {
            Some(format!("beta*d = {bd} >= {label}"))
        }
    };
    let failure = match protocol {
        Protocol::RegNoAbstain => return AlwaysInconsistent,
        Protocol::ClsAbstain | Protocol::Specialists => shrink().or_else(|| below(1.0, "1")),
        Protocol::ClsNoAbstain => shrink().or_else(|| below(0.5, "1/2")),
        Protocol::RegAbstain => shrink().or_else(|| below(1.0, "1")).or_else(|| {
            if schedule.clamp.is_some() {
                // constant c_n: c^2/(n r^d) ~ n^(beta d - 1)
                return None;
            }
            if schedule.gamma <= 0.0 {
                return Some("gamma = 0 without clamp: c_n does not diverge".to_string());
            }
            let e = 2.0 * schedule.gamma + bd;
            if e < 1.0 {
                None
            } else {
                Some(format!("2*gamma + beta*d = {e} >= 1"))
            }
        }),
    };
    match failure {
        None => SatisfiesSufficientConditions,
        Some(reason) => ViolatesSufficientConditions(reason),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_power_laws() {
        let s = Schedule::bandwidth(0.5, 0.3).unwrap();
        assert_eq!(s.eval(1).unwrap().0, 0.5);
        let r = s.eval(100_000).unwrap().0;
        assert!((r - 0.5 * 10f64.powf(-1.5)).abs() < 1e-15);
        assert!((r - 0.01581).abs() < 1e-5);
        let clamped = Schedule::new(0.5, 0.3, 1.0, 0.4, Some(2.0)).unwrap();
        for n in [1, 10, 1_000_000] {
            assert_eq!(clamped.eval(n).unwrap().1, 2.0);
        }
        assert!(s.eval(0).is_err());
    }

    #[test]
    fn monotone_sequences() {
        let s = Schedule::new(0.7, 0.25, 1.5, 0.1, None).unwrap();
        let mut prev = s.eval(1).unwrap();
        for n in 2..2000 {
            let cur = s.eval(n).unwrap();
            assert!(cur.0 > 0.0 && cur.0 <= prev.0);
            assert!(cur.1 >= prev.1);
            prev = cur;
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(Schedule::new(0.0, 0.3, 1.0, 0.0, None).is_err());
        assert!(Schedule::new(0.5, -0.1, 1.0, 0.0, None).is_err());
        assert!(Schedule::new(0.5, 0.3, 1.0, 0.0, Some(-2.0)).is_err());
    }

    #[test]
    fn verdicts() {
        let s = Schedule::bandwidth(0.5, 0.3).unwrap();
        assert_eq!(validate_schedule(&s, Protocol::ClsAbstain, 1), Verdict::SatisfiesSufficientConditions);
        let fast = Schedule::bandwidth(0.5, 0.75).unwrap();
        match validate_schedule(&fast, Protocol::ClsNoAbstain, 1) {
            Verdict::ViolatesSufficientConditions(r) => assert!(r.contains("1/2"), "{r}"),
            v => panic!("{v:?}"),
        }
        assert!(validate_schedule(&fast, Protocol::ClsAbstain, 1).is_satisfied());
        assert!(!validate_schedule(&fast, Protocol::Specialists, 2).is_satisfied());
        let reg = Schedule::new(0.5, 0.3, 1.0, 0.1, None).unwrap();
        assert!(validate_schedule(&reg, Protocol::RegAbstain, 1).is_satisfied());
        let reg_fast = Schedule::new(0.5, 0.3, 1.0, 0.4, None).unwrap();
        assert!(!validate_schedule(&reg_fast, Protocol::RegAbstain, 1).is_satisfied());
        let reg_flat = Schedule::new(0.5, 0.3, 1.0, 0.0, None).unwrap();
        assert!(!validate_schedule(&reg_flat, Protocol::RegAbstain, 1).is_satisfied());
        let reg_clamped = Schedule::new(0.5, 0.3, 1.0, 0.0, Some(2.0)).unwrap();
        assert!(validate_schedule(&reg_clamped, Protocol::RegAbstain, 1).is_satisfied());
        assert_eq!(validate_schedule(&reg, Protocol::RegNoAbstain, 1), Verdict::AlwaysInconsistent);
        let flat = Schedule::bandwidth(0.5, 0.0).unwrap();
        assert!(!validate_schedule(&flat, Protocol::ClsAbstain, 1).is_satisfied());
    }

    #[test]
    fn regression_exponent_matches_direct_ratio() {
        // c_n^2 / (n r_n^d) evaluated numerically decays iff 2 gamma + beta d < 1
        for &(beta, gamma, d) in &[(0.3, 0.1, 1usize), (0.2, 0.3, 2), (0.4, 0.35, 1), (0.1, 0.2, 3)] {
            let s = Schedule::new(0.5, beta, 1.0, gamma, None).unwrap();
            let ratio = |n: u64| {
                let (r, c) = s.eval(n).unwrap();
                c * c / (n as f64 * r.powi(d as i32))
            };
            let decays = ratio(1_000_000_000) < ratio(1_000_000);
            assert_eq!(decays, validate_schedule(&s, Protocol::RegAbstain, d).is_satisfied(), "{beta} {gamma} {d}");
        }
    }
}
