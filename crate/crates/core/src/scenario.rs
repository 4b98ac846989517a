//! Synthetic joint distributions with known Bayes oracles.
//!
//! Every scenario exposes its regression function `eta(x) = E[Y | X = x]` in
//! closed form, a closed-form Bayes risk and an independent quadrature route
//! to the same number.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point, Region};
use crate::protocol::Label;
use crate::quadrature::{integrate, integrate_2d, integrate_piecewise};

/// Tolerance used by the numerical Bayes-risk oracle.
pub const QUADRATURE_TOL: f64 = 1e-9;

/// Default cap on consecutive rejected draws in conditional sampling.
pub const DEFAULT_MAX_REJECTS: u32 = 10_000;

/// One labeled training pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub x: Point,
    pub y: f64,
}

impl Example {
    pub fn new(x: impl Into<Point>, y: f64) -> Self {
        Self { x: x.into(), y }
    }

    pub fn label(&self) -> Label {
        Label::from(self.y >= 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

/// Outcome of region-conditional sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditional {
    Sample(Example),
    /// Every one of `max_rejects` consecutive draws missed the region.
    Untrainable,
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

// Cityscape concentration field: two Gaussian plumes (center x, center y, width).
const PLUMES: [(f64, f64, f64); 2] = [(0.3, 0.7, 0.15), (0.65, 0.35, 0.2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum Scenario {
    /// `X | Y=1 ~ N(+mu, sigma^2)`, `X | Y=0 ~ N(-mu, sigma^2)`, `P{Y=1} = prior`.
    #[serde(rename = "gaussmix-1d")]
    GaussMix1d { mu: f64, sigma: f64, prior: f64 },
    /// Isotropic two-class mixture with means `+-mu (1,1)/sqrt(2)`.
    #[serde(rename = "gaussmix-2d")]
    GaussMix2d { mu: f64, sigma: f64, prior: f64 },
    /// Uniform `X` on the unit square; `eta = q` on even cells, `1 - q` on odd.
    #[serde(rename = "checkerboard-2d")]
    Checkerboard2d { cells: u32, q: f64 },
    /// Uniform `X` on `[0,1]`, `Y = sin(2 pi X) + sigma * N(0,1)`.
    #[serde(rename = "sine-1d")]
    Sine1d { sigma: f64 },
    /// Uniform `X` on the unit square. `Y` indicates whether a plume
    /// concentration reaches `threshold`, flipped with probability `flip`.
    #[serde(rename = "cityscape-2d")]
    Cityscape2d { flip: f64, threshold: f64 },
    /// Uniform `X` on `[0,1]^d` with a deterministic label.
    #[serde(rename = "constant-label")]
    ConstantLabel { dim: usize, label: Label },
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

fn param_err(key: &str, reason: impl Into<String>) -> Error {
    Error::ScenarioParam { key: key.to_string(), reason: reason.into() }
}

fn take<T: std::str::FromStr>(params: &mut BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match params.remove(key) {
        None => Ok(default),
        Some(v) => v.trim().parse().map_err(|_| param_err(key, format!("cannot parse `{v}`"))),
    }
}

impl Scenario {
    pub const IDS: [&'static str; 6] =
        ["gaussmix-1d", "gaussmix-2d", "checkerboard-2d", "sine-1d", "cityscape-2d", "constant-label"];

    pub fn gaussmix_1d() -> Self {
        Self::GaussMix1d { mu: 1.0, sigma: 1.0, prior: 0.5 }
    }

    pub fn gaussmix_2d() -> Self {
        Self::GaussMix2d { mu: 1.0, sigma: 1.0, prior: 0.5 }
    }

    pub fn checkerboard_2d() -> Self {
        Self::Checkerboard2d { cells: 4, q: 0.8 }
    }

    pub fn sine_1d(sigma: f64) -> Self {
        Self::Sine1d { sigma }
    }

    pub fn cityscape_2d() -> Self {
        Self::Cityscape2d { flip: 0.1, threshold: 0.5 }
    }

    /// Looks up a scenario by id (case-insensitive) and applies `key=value`
    /// parameters on top of its defaults.
    pub fn from_params(id: &str, params: &BTreeMap<String, String>) -> Result<Self> {
        let mut p = params.clone();
        let s = match id.trim().to_ascii_lowercase().as_str() {
            "gaussmix-1d" => Self::GaussMix1d {
                mu: take(&mut p, "mu", 1.0)?,
                sigma: take(&mut p, "sigma", 1.0)?,
                prior: take(&mut p, "prior", 0.5)?,
            },
            "gaussmix-2d" => Self::GaussMix2d {
                mu: take(&mut p, "mu", 1.0)?,
                sigma: take(&mut p, "sigma", 1.0)?,
                prior: take(&mut p, "prior", 0.5)?,
            },
            "checkerboard-2d" => Self::Checkerboard2d { cells: take(&mut p, "cells", 4)?, q: take(&mut p, "q", 0.8)? },
            "sine-1d" => Self::Sine1d { sigma: take(&mut p, "sigma", 0.1)? },
            "cityscape-2d" => {
                Self::Cityscape2d { flip: take(&mut p, "flip", 0.1)?, threshold: take(&mut p, "threshold", 0.5)? }
            }
            "constant-label" => Self::ConstantLabel { dim: take(&mut p, "d", 1)?, label: take(&mut p, "label", 1)? },
            _ => return Err(Error::UnknownScenario(id.to_string())),
        };
        if let Some(k) = p.keys().next() {
            return Err(param_err(k, format!("not a parameter of `{}`", s.id())));
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |k: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(param_err(k, "must be finite and > 0"))
            }
        };
        let prob = |k: &str, v: f64, open: bool| {
            let ok = if open { v > 0.0 && v < 1.0 } else { (0.0..=1.0).contains(&v) };
            if ok {
                Ok(())
            } else {
                Err(param_err(k, if open { "must lie in (0, 1)" } else { "must lie in [0, 1]" }))
            }
        };
        match *self {
            Self::GaussMix1d { mu, sigma, prior } | Self::GaussMix2d { mu, sigma, prior } => {
                positive("mu", mu)?;
                positive("sigma", sigma)?;
                prob("prior", prior, true)
            }
            Self::Checkerboard2d { cells, q } => {
                if cells == 0 {
                    return Err(param_err("cells", "must be >= 1"));
                }
                prob("q", q, false)
            }
            Self::Sine1d { sigma } => {
                if sigma >= 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(param_err("sigma", "must be finite and >= 0"))
                }
            }
            Self::Cityscape2d { flip, threshold } => {
                prob("flip", flip, false)?;
                positive("threshold", threshold)
            }
            Self::ConstantLabel { dim, label } => {
                if dim == 0 {
                    return Err(param_err("d", "must be >= 1"));
                }
                if label > 1 {
                    return Err(param_err("label", "must be 0 or 1"));
                }
                Ok(())
            }
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::GaussMix1d { .. } => "gaussmix-1d",
            Self::GaussMix2d { .. } => "gaussmix-2d",
            Self::Checkerboard2d { .. } => "checkerboard-2d",
            Self::Sine1d { .. } => "sine-1d",
            Self::Cityscape2d { .. } => "cityscape-2d",
            Self::ConstantLabel { .. } => "constant-label",
        }
    }

    /// Canonical parameter listing, enough to rebuild the scenario.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match *self {
            Self::GaussMix1d { mu, sigma, prior } | Self::GaussMix2d { mu, sigma, prior } => {
                vec![("mu", mu.to_string()), ("sigma", sigma.to_string()), ("prior", prior.to_string())]
            }
            Self::Checkerboard2d { cells, q } => vec![("cells", cells.to_string()), ("q", q.to_string())],
            Self::Sine1d { sigma } => vec![("sigma", sigma.to_string())],
            Self::Cityscape2d { flip, threshold } => {
                vec![("flip", flip.to_string()), ("threshold", threshold.to_string())]
            }
            Self::ConstantLabel { dim, label } => vec![("d", dim.to_string()), ("label", label.to_string())],
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            Self::GaussMix1d { .. } | Self::Sine1d { .. } => 1,
            Self::GaussMix2d { .. } | Self::Checkerboard2d { .. } | Self::Cityscape2d { .. } => 2,
            Self::ConstantLabel { dim, .. } => dim,
        }
    }

    pub fn task(&self) -> Task {
        match self {
            Self::Sine1d { .. } => Task::Regression,
            _ => Task::Classification,
        }
    }

    /// Declared support of `P_X`, if bounded.
    pub fn support(&self) -> Option<BoundingBox> {
        match self {
            Self::GaussMix1d { .. } | Self::GaussMix2d { .. } => None,
            _ => Some(BoundingBox::unit(self.dimension())),
        }
    }

    fn uniform_x(&self) -> bool {
        !matches!(self, Self::GaussMix1d { .. } | Self::GaussMix2d { .. })
    }

    /// Almost-sure bound on `|Y|`, when one exists.
    pub fn label_bound(&self) -> Option<f64> {
        match self.task() {
            Task::Classification => Some(1.0),
            Task::Regression => match *self {
                Self::Sine1d { sigma: 0.0 } => Some(1.0),
                _ => None,
            },
        }
    }

    /// Density of `P_X` at `x`.
    pub fn density(&self, x: &[f64]) -> f64 {
        match *self {
            Self::GaussMix1d { mu, sigma, prior } => {
                let z = x[0] / sigma;
                let m = mu / sigma;
                (prior * normal_pdf(z - m) + (1.0 - prior) * normal_pdf(z + m)) / sigma
            }
            Self::GaussMix2d { mu, sigma, prior } => {
                let m = mu / SQRT_2;
                let s2 = sigma * sigma;
                let g = |c: f64| (-((x[0] - c).powi(2) + (x[1] - c).powi(2)) / (2.0 * s2)).exp() / (2.0 * PI * s2);
                prior * g(m) + (1.0 - prior) * g(-m)
            }
            _ => {
                if BoundingBox::unit(self.dimension()).contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> (Point, Option<Label>) {
        match *self {
            Self::GaussMix1d { mu, sigma, prior } => {
                let y = Label::from(rng.random::<f64>() < prior);
                let m = if y == 1 { mu } else { -mu };
                let z: f64 = rng.sample(StandardNormal);
                (Point::from(m + sigma * z), Some(y))
            }
            Self::GaussMix2d { mu, sigma, prior } => {
                let y = Label::from(rng.random::<f64>() < prior);
                let m = if y == 1 { mu / SQRT_2 } else { -mu / SQRT_2 };
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                (Point::from([m + sigma * z1, m + sigma * z2]), Some(y))
            }
            _ => ((0..self.dimension()).map(|_| rng.random::<f64>()).collect(), None),
        }
    }

    /// Draws `Y` from `P(Y | X = x)`.
    pub fn sample_label<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        match *self {
            Self::Sine1d { sigma } => {
                let e: f64 = rng.sample(StandardNormal);
                self.regression_function(x) + sigma * e
            }
            Self::ConstantLabel { label, .. } => f64::from(label),
            _ => {
                if rng.random::<f64>() < self.regression_function(x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// One draw from `P_XY`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Example {
        let (x, y) = self.sample_x(rng);
        let y = match y {
            Some(label) => f64::from(label),
            None => self.sample_label(&x, rng),
        };
        Example { x, y }
    }

    /// `P_XY` conditioned on `X` in `region`, by redrawing until the point
    /// lands inside. Works for any scenario.
    pub fn sample_conditional_rejection<R: Rng + ?Sized>(
        &self,
        region: &Region,
        rng: &mut R,
        max_rejects: u32,
    ) -> Result<Conditional> {
        check_conditional_args(region, max_rejects)?;
        for _ in 0..max_rejects {
            let e = self.sample(rng);
            if region.contains(&e.x) {
                return Ok(Conditional::Sample(e));
            }
        }
        Ok(Conditional::Untrainable)
    }

    pub fn has_direct_conditional_sampler(&self) -> bool {
        self.uniform_x()
    }

    /// Direct conditional sampler for uniform-`X` scenarios: uniform on
    /// `region` intersected with the unit box, via proposals restricted to
    /// the intersection's bounding box. `None` for other scenarios.
    pub fn sample_conditional_direct<R: Rng + ?Sized>(
        &self,
        region: &Region,
        rng: &mut R,
        max_rejects: u32,
    ) -> Option<Result<Conditional>> {
        if !self.uniform_x() {
            return None;
        }
        if let Err(e) = check_conditional_args(region, max_rejects) {
            return Some(Err(e));
        }
        let Some(bbox) = BoundingBox::unit(self.dimension()).intersect(&region.bounding_box()) else {
            return Some(Ok(Conditional::Untrainable));
        };
        for _ in 0..max_rejects {
            let x: Point = bbox.lo.iter().zip(bbox.hi.iter()).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect();
            if region.contains(&x) {
                let y = self.sample_label(&x, rng);
                return Some(Ok(Conditional::Sample(Example { x, y })));
            }
        }
        Some(Ok(Conditional::Untrainable))
    }

    /// Region-conditional sampling, preferring the direct sampler.
    pub fn sample_conditional<R: Rng + ?Sized>(
        &self,
        region: &Region,
        rng: &mut R,
        max_rejects: u32,
    ) -> Result<Conditional> {
        match self.sample_conditional_direct(region, rng, max_rejects) {
            Some(r) => r,
            None => self.sample_conditional_rejection(region, rng, max_rejects),
        }
    }

    fn cityscape_toxic(x: &[f64], threshold: f64) -> bool {
        let field: f64 = PLUMES
            .iter()
            .map(|&(cx, cy, w)| (-((x[0] - cx).powi(2) + (x[1] - cy).powi(2)) / (2.0 * w * w)).exp())
            .sum();
        field >= threshold
    }

    /// `eta(x) = E[Y | X = x]`.
    pub fn regression_function(&self, x: &[f64]) -> f64 {
        match *self {
            Self::GaussMix1d { mu, sigma, prior } => {
                1.0 / (1.0 + (1.0 - prior) / prior * (-2.0 * mu * x[0] / (sigma * sigma)).exp())
            }
            Self::GaussMix2d { mu, sigma, prior } => {
                let proj = (x[0] + x[1]) / SQRT_2;
                1.0 / (1.0 + (1.0 - prior) / prior * (-2.0 * mu * proj / (sigma * sigma)).exp())
            }
            Self::Checkerboard2d { cells, q } => {
                let k = f64::from(cells);
                let cx = (x[0] * k).floor().clamp(0.0, k - 1.0) as i64;
                let cy = (x[1] * k).floor().clamp(0.0, k - 1.0) as i64;
                if (cx + cy) % 2 == 0 {
                    q
                } else {
                    1.0 - q
                }
            }
            Self::Sine1d { .. } => (2.0 * PI * x[0]).sin(),
            Self::Cityscape2d { flip, threshold } => {
                if Self::cityscape_toxic(x, threshold) {
                    1.0 - flip
                } else {
                    flip
                }
            }
            Self::ConstantLabel { label, .. } => f64::from(label),
        }
    }

    /// `Var(Y | X = x)`.
    pub fn conditional_variance(&self, x: &[f64]) -> f64 {
        match *self {
            Self::Sine1d { sigma } => sigma * sigma,
            _ => {
                let e = self.regression_function(x);
                e * (1.0 - e)
            }
        }
    }

    /// Bayes decision rule: 1 iff `eta(x) >= 1/2`.
    pub fn bayes_classifier(&self, x: &[f64]) -> Label {
        Label::from(self.regression_function(x) >= 0.5)
    }

    /// Closed-form Bayes risk (zero-one loss for classification, squared
    /// loss for regression).
    pub fn bayes_risk(&self) -> Result<f64> {
        Ok(match *self {
            Self::GaussMix1d { mu, sigma, prior } | Self::GaussMix2d { mu, sigma, prior } => {
                let t = sigma * sigma * ((1.0 - prior) / prior).ln() / (2.0 * mu);
                prior * normal_cdf((t - mu) / sigma) + (1.0 - prior) * (1.0 - normal_cdf((t + mu) / sigma))
            }
            Self::Checkerboard2d { q, .. } => q.min(1.0 - q),
            Self::Sine1d { sigma } => sigma * sigma,
            Self::Cityscape2d { flip, .. } => flip.min(1.0 - flip),
            Self::ConstantLabel { .. } => 0.0,
        })
    }

    /// Integrates `h` against `P_X` by quadrature.
    pub fn integrate_over_x<F: Fn(&[f64]) -> f64>(&self, h: F, tol: f64) -> Result<f64> {
        match *self {
            Self::GaussMix1d { mu, sigma, prior } => {
                let l = mu + 14.0 * sigma;
                let t = sigma * sigma * ((1.0 - prior) / prior).ln() / (2.0 * mu);
                let mut breaks = vec![-l, -mu, 0.0, mu, l];
                if t.abs() < l {
                    breaks.push(t);
                }
                breaks.sort_by(f64::total_cmp);
                breaks.dedup();
                integrate_piecewise(|u| self.density(&[u]) * h(&[u]), &breaks, tol)
            }
            Self::GaussMix2d { mu, sigma, .. } => {
                let l = mu + 14.0 * sigma;
                integrate_2d(|u, v| self.density(&[u, v]) * h(&[u, v]), (-l, l), (-l, l), tol)
            }
            Self::Checkerboard2d { cells, .. } => {
                let k = f64::from(cells);
                let per = tol / (k * k);
                let mut total = 0.0;
                for i in 0..cells {
                    for j in 0..cells {
                        let (a, b) = (f64::from(i) / k, f64::from(i + 1) / k);
                        let (c, d) = (f64::from(j) / k, f64::from(j + 1) / k);
                        // evaluate just inside the cell so edge points take the cell's value
                        let shrink = |lo: f64, hi: f64, v: f64| v.clamp(lo + 1e-12, hi - 1e-12);
                        total += integrate_2d(|u, v| h(&[shrink(a, b, u), shrink(c, d, v)]), (a, b), (c, d), per)?;
                    }
                }
                Ok(total)
            }
            Self::Sine1d { .. } => integrate_piecewise(|u| h(&[u]), &[0.0, 0.25, 0.5, 0.75, 1.0], tol),
            Self::Cityscape2d { .. } => integrate_2d(|u, v| h(&[u, v]), (0.0, 1.0), (0.0, 1.0), tol),
            Self::ConstantLabel { dim, .. } => match dim {
                1 => integrate(|u| h(&[u]), 0.0, 1.0, tol),
                2 => integrate_2d(|u, v| h(&[u, v]), (0.0, 1.0), (0.0, 1.0), tol),
                _ => Err(Error::Unsupported(format!("quadrature over [0,1]^{dim}"))),
            },
        }
    }

    /// Bayes risk by quadrature: `E[min(eta, 1 - eta)]` or `E[Var(Y|X)]`.
    pub fn bayes_risk_numerical(&self) -> Result<f64> {
        match self.task() {
            Task::Classification => self.integrate_over_x(
                |x| {
                    let e = self.regression_function(x);
                    e.min(1.0 - e)
                },
                QUADRATURE_TOL,
            ),
            Task::Regression => self.integrate_over_x(|x| self.conditional_variance(x), QUADRATURE_TOL),
        }
    }

    /// Zero-one risk of an arbitrary classifier, by quadrature.
    pub fn classifier_risk<G: Fn(&[f64]) -> Label>(&self, g: G) -> Result<f64> {
        self.integrate_over_x(
            |x| {
                let e = self.regression_function(x);
                if g(x) == 1 {
                    1.0 - e
                } else {
                    e
                }
            },
            QUADRATURE_TOL,
        )
    }

    /// `E[Y^2]`, the squared-loss risk of predicting zero everywhere.
    pub fn label_second_moment(&self) -> Result<f64> {
        self.integrate_over_x(
            |x| {
                let e = self.regression_function(x);
                e * e + self.conditional_variance(x)
            },
            QUADRATURE_TOL,
        )
    }
}

fn check_conditional_args(region: &Region, max_rejects: u32) -> Result<()> {
    if region.radius.is_nan() || region.radius <= 0.0 {
        return Err(Error::Config("conditional sampling needs a region radius > 0".into()));
    }
    if max_rejects == 0 {
        return Err(Error::Config("max_rejects must be >= 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn catalog() -> Vec<Scenario> {
        vec![
            Scenario::gaussmix_1d(),
            Scenario::GaussMix1d { mu: 0.7, sigma: 1.3, prior: 0.3 },
            Scenario::gaussmix_2d(),
            Scenario::checkerboard_2d(),
            Scenario::sine_1d(0.1),
            Scenario::cityscape_2d(),
            Scenario::ConstantLabel { dim: 1, label: 1 },
        ]
    }

    #[test]
    fn sample_type_contracts() {
        let mut rng = seed::stream(1, &[]);
        for _ in 0..1000 {
            let e = Scenario::gaussmix_1d().sample(&mut rng);
            assert!(e.y == 0.0 || e.y == 1.0);
            assert!(e.x.is_finite());
            let s = Scenario::sine_1d(0.1).sample(&mut rng);
            assert!((0.0..=1.0).contains(&s.x[0]));
        }
    }

    #[test]
    fn supports_contain_samples() {
        let mut rng = seed::stream(2, &[]);
        for s in catalog() {
            if let Some(b) = s.support() {
                for _ in 0..2000 {
                    assert!(b.contains(&s.sample(&mut rng).x), "{s}");
                }
            }
        }
    }

    #[test]
    fn gaussmix_prior_by_law_of_large_numbers() {
        let mut rng = seed::stream(3, &[]);
        let s = Scenario::gaussmix_1d();
        let m = 1_000_000;
        let ones: f64 = (0..m).map(|_| s.sample(&mut rng).y).sum();
        // 3 sigma = 3 * 0.5 / 1000 = 0.0015
        assert!((ones / m as f64 - 0.5).abs() <= 0.002);
    }

    #[test]
    fn regression_function_values() {
        assert!((Scenario::sine_1d(0.1).regression_function(&[0.25]) - 1.0).abs() < 1e-15);
        let g = Scenario::gaussmix_1d();
        assert_eq!(g.regression_function(&[0.0]), 0.5);
        let expected = 1.0 / (1.0 + (-2.0f64).exp());
        assert!((g.regression_function(&[1.0]) - expected).abs() < 1e-15);
        assert!((g.regression_function(&[1.0]) - 0.8808).abs() < 1e-4);
    }

    #[test]
    fn gaussmix_posterior_matches_bayes_rule_from_densities() {
        // Independent route: prior-weighted class-conditional densities.
        let s = Scenario::GaussMix1d { mu: 0.8, sigma: 1.5, prior: 0.35 };
        for &x in &[-3.0, -0.4, 0.0, 0.9, 2.5] {
            let p1 = 0.35 * normal_pdf((x - 0.8) / 1.5);
            let p0 = 0.65 * normal_pdf((x + 0.8) / 1.5);
            assert!((s.regression_function(&[x]) - p1 / (p1 + p0)).abs() < 1e-12);
        }
    }

    #[test]
    fn bayes_classifier_tie_goes_to_one() {
        let g = Scenario::gaussmix_1d();
        assert_eq!(g.bayes_classifier(&[2.0]), 1);
        assert_eq!(g.bayes_classifier(&[-2.0]), 0);
        assert_eq!(g.bayes_classifier(&[0.0]), 1);
    }

    #[test]
    fn bayes_risk_closed_forms() {
        assert_eq!(Scenario::sine_1d(0.1).bayes_risk().unwrap(), 0.1 * 0.1);
        let l = Scenario::gaussmix_1d().bayes_risk().unwrap();
        assert!((l - 0.158_655_253_931_457).abs() < 1e-12, "{l}");
        assert_eq!(Scenario::ConstantLabel { dim: 2, label: 1 }.bayes_risk().unwrap(), 0.0);
        assert!((Scenario::gaussmix_2d().bayes_risk().unwrap() - l).abs() < 1e-15);
    }

    #[test]
    fn closed_form_and_quadrature_bayes_risks_agree() {
        for s in catalog() {
            let a = s.bayes_risk().unwrap();
            let b = s.bayes_risk_numerical().unwrap();
            assert!((a - b).abs() < 1e-6, "{s}: closed {a} vs quadrature {b}");
        }
    }

    #[test]
    fn bayes_classifier_risk_equals_bayes_risk() {
        for s in catalog().into_iter().filter(|s| s.task() == Task::Classification) {
            let r = s.classifier_risk(|x| s.bayes_classifier(x)).unwrap();
            assert!((r - s.bayes_risk().unwrap()).abs() < 1e-5, "{s}");
        }
    }

    #[test]
    fn sine_second_moment() {
        let m = Scenario::sine_1d(0.1).label_second_moment().unwrap();
        assert!((m - 0.51).abs() < 1e-8);
    }

    #[test]
    fn params_round_trip_through_from_params() {
        for s in catalog() {
            let p: BTreeMap<String, String> = s.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            assert_eq!(Scenario::from_params(s.id(), &p).unwrap(), s);
        }
        assert_eq!(Scenario::from_params("GaussMix-1D", &BTreeMap::new()).unwrap(), Scenario::gaussmix_1d());
    }

    #[test]
    fn bad_params_are_rejected() {
        let mut p = BTreeMap::new();
        p.insert("sigma".to_string(), "-1".to_string());
        assert!(matches!(Scenario::from_params("sine-1d", &p), Err(Error::ScenarioParam { .. })));
        p.clear();
        p.insert("bogus".to_string(), "1".to_string());
        assert!(Scenario::from_params("sine-1d", &p).is_err());
        assert!(matches!(Scenario::from_params("nope", &BTreeMap::new()), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn conditional_sampling_stays_in_region() {
        let mut rng = seed::stream(4, &[]);
        let s = Scenario::cityscape_2d();
        let region = Region::new([0.2, 0.9], 0.15);
        for _ in 0..2000 {
            match s.sample_conditional(&region, &mut rng, DEFAULT_MAX_REJECTS).unwrap() {
                Conditional::Sample(e) => assert!(region.contains(&e.x)),
                Conditional::Untrainable => panic!("region has positive mass"),
            }
        }
    }

    #[test]
    fn disjoint_region_is_untrainable() {
        let mut rng = seed::stream(5, &[]);
        let region = Region::new(5.0, 0.1);
        let s = Scenario::sine_1d(0.1);
        assert_eq!(s.sample_conditional(&region, &mut rng, 1000).unwrap(), Conditional::Untrainable);
        assert_eq!(s.sample_conditional_rejection(&region, &mut rng, 1000).unwrap(), Conditional::Untrainable);
    }

    #[test]
    fn conditional_argument_checks() {
        let mut rng = seed::stream(6, &[]);
        let s = Scenario::gaussmix_1d();
        assert!(s.sample_conditional(&Region::new(0.0, 0.0), &mut rng, 10).is_err());
        assert!(s.sample_conditional(&Region::new(0.0, 1.0), &mut rng, 0).is_err());
    }
}
