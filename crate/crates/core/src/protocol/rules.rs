//! Local sensor decision rules.

use rand::Rng;

use super::{LipschitzFusionSpec, SensorResponse, SensorState};
use crate::error::{Error, Result};
use crate::geometry::{within, Point, Region};
use crate::scenario::Example;

fn datum(sensor: &SensorState) -> Result<&Example> {
    sensor.datum.as_ref().ok_or_else(|| Error::Config("sensor holds no training datum".into()))
}

/// Votes `Y_i` when `X_i` lies in the closed ball of radius `r_n` around
/// the query, abstains otherwise. Untrained sensors abstain.
pub fn respond_cls_abstain(sensor: &SensorState, x: &[f64], r_n: f64) -> SensorResponse {
    match &sensor.datum {
        Some(e) if within(&e.x, x, r_n) => SensorResponse::from_label(e.y),
        _ => SensorResponse::Abstain,
    }
}

/// Votes `Y_i` in the ball, otherwise guesses. The guess is the sensor's
/// fixed coin when it has one, else `fresh_coin < 1/2`.
pub fn respond_cls_noabstain(
    sensor: &SensorState,
    x: &[f64],
    r_n: f64,
    fresh_coin: Option<f64>,
) -> Result<SensorResponse> {
    let e = datum(sensor)?;
    if within(&e.x, x, r_n) {
        return Ok(SensorResponse::from_label(e.y));
    }
    match (sensor.fixed_coin, fresh_coin) {
        (Some(bit), _) => Ok(SensorResponse::vote(bit)),
        (None, Some(u)) => Ok(SensorResponse::vote(u < 0.5)),
        (None, None) => Err(Error::Config("guessing sensor has neither a fixed nor a fresh coin".into())),
    }
}

/// Bias of the coin a voting sensor flips: `Y/(2c) + 1/2` if `|Y| <= c`,
/// else `1/2`.
#[inline]
pub fn reg_abstain_vote_probability(y: f64, c_n: f64) -> f64 {
    if y.abs() <= c_n {
        y / (2.0 * c_n) + 0.5
    } else {
        0.5
    }
}

/// Abstains unless the query is within `r_n` of `X_i`; otherwise votes 1 iff
/// `coin` falls below the label-driven bias.
pub fn respond_reg_abstain(sensor: &SensorState, x: &[f64], r_n: f64, c_n: f64, coin: f64) -> Result<SensorResponse> {
    if c_n.is_nan() || c_n <= 0.0 {
        return Err(Error::Config(format!("c_n must be > 0, got {c_n}")));
    }
    let e = datum(sensor)?;
    if !within(x, &e.x, r_n) {
        return Ok(SensorResponse::Abstain);
    }
    Ok(SensorResponse::vote(coin < reg_abstain_vote_probability(e.y, c_n)))
}

/// Votes 1 iff `coin < a(x, X_i, Y_i)`. Never abstains.
pub fn respond_reg_noabstain(
    sensor: &SensorState,
    x: &[f64],
    spec: &LipschitzFusionSpec,
    coin: f64,
) -> Result<SensorResponse> {
    let e = datum(sensor)?;
    Ok(SensorResponse::vote(coin < spec.family().probability(x, &e.x, e.y)))
}

/// Votes `Y_i` iff the query lies in the sensor's own region of
/// specialization `B_{r_n}(center)`. Untrained sensors always abstain.
pub fn respond_specialist(sensor: &SensorState, x: &[f64], r_n: f64) -> SensorResponse {
    match (&sensor.datum, &sensor.region_center) {
        (Some(e), Some(c)) if within(c, x, r_n) => SensorResponse::from_label(e.y),
        _ => SensorResponse::Abstain,
    }
}

/// `n` regions of radius `r_n` with centers i.i.d. uniform on `[0,1]^d`.
pub fn assign_specialist_regions<R: Rng + ?Sized>(n: usize, d: usize, r_n: f64, rng: &mut R) -> Vec<Region> {
    (0..n)
        .map(|_| Region { center: (0..d).map(|_| rng.random::<f64>()).collect::<Point>(), radius: r_n })
        .collect()
}
