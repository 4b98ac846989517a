//! Adaptive Simpson quadrature used by the Bayes-risk oracles.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

struct Adaptive<'f, F> {
    f: &'f F,
    worst: f64,
    failed: bool,
}

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth >= MAX_DEPTH || (b - a) <= f64::EPSILON * a.abs().max(1.0) {
            if delta.abs() > 15.0 * tol {
                self.failed = true;
                self.worst = self.worst.max(delta.abs() / 15.0);
            }
            return left + right + delta / 15.0;
        }
        self.step(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.step(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut run = Adaptive { f: &f, worst: 0.0, failed: false };
    let v = run.step(a, b, fa, fm, fb, whole, tol, 0);
    if run.failed || !v.is_finite() {
        return Err(Error::Integration { achieved: run.worst, requested: tol });
    }
    Ok(v)
}

/// Integrates `f` over a sequence of breakpoints, splitting the tolerance
/// evenly. Useful when the integrand has known kinks or jumps.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<f64> {
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    breaks.windows(2).try_fold(0.0, |acc, w| {
        // Keep evaluations off the breakpoints so a jump there belongs to
        // neither neighbouring piece.
        let (a, b) = (w[0], w[1]);
        let eps = (b - a).abs() * 1e-13;
        let (lo, hi) = (a.min(b) + eps, a.max(b) - eps);
        Ok(acc + integrate(|x| f(x.clamp(lo, hi)), a, b, tol / pieces)?)
    })
}

/// Nested two-dimensional integral over a rectangle.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, x: (f64, f64), y: (f64, f64), tol: f64) -> Result<f64> {
    let inner_tol = tol / (2.0 * (x.1 - x.0).abs().max(1.0));
    let inner_failure = std::cell::Cell::new(None);
    let outer = integrate(
        |u| match integrate(|v| f(u, v), y.0, y.1, inner_tol) {
            Ok(v) => v,
            Err(e) => {
                inner_failure.set(Some(e));
                f64::NAN
            }
        },
        x.0,
        x.1,
        tol / 2.0,
    );
    if let Some(e) = inner_failure.take() {
        return Err(e);
    }
    outer
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_trig() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-10);
        let s = integrate(|x| (2.0 * PI * x).sin().powi(2), 0.0, 1.0, 1e-10).unwrap();
        assert!((s - 0.5).abs() < 1e-9);
    }

    #[test]
    fn gaussian_density_integrates_to_one() {
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let v = integrate(phi, -12.0, 12.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn piecewise_handles_jumps() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let v = integrate_piecewise(step, &[0.0, 0.3, 1.0], 1e-12).unwrap();
        assert!((v - (0.3 + 1.4)).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional() {
        let v = integrate_2d(|x, y| x * y, (0.0, 1.0), (0.0, 2.0), 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_is_reported() {
        let err = integrate(|x| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-14).unwrap_err();
        assert!(matches!(err, Error::Integration { .. }));
    }
}
