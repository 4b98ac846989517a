//! Centralized reference rules and exact vote-count laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::within;
use crate::network::NetworkState;
use crate::protocol::{reg_abstain_vote_probability, CoinMode, Label, Protocol};
use crate::scenario::{Example, Scenario};

/// Plug-in naive kernel classifier: 1 iff the mean label over training
/// points in the closed ball `B_r(x)` is at least 1/2; `default` on an
/// empty ball.
pub fn naive_kernel_classify(train: &[Example], x: &[f64], r: f64, default: Label) -> Label {
    let (mut num, mut den) = (0.0, 0.0);
    for e in train {
        if within(&e.x, x, r) {
            num += e.y;
            den += 1.0;
        }
    }
    if den == 0.0 {
        return default;
    }
    Label::from(num / den >= 0.5)
}

/// Naive kernel regression estimate: mean label in `B_r(x)`, 0 if empty.
pub fn naive_kernel_regress(train: &[Example], x: &[f64], r: f64) -> f64 {
    let (sum, count) = train
        .iter()
        .filter(|e| within(&e.x, x, r))
        .fold((0.0, 0usize), |(s, c), e| (s + e.y, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Law of the number of 1-votes among independent sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteDistribution {
    probabilities: Vec<f64>,
}

impl VoteDistribution {
    /// Number of sensors.
    pub fn n(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `P{exactly k votes}`.
    pub fn pmf(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    /// `P{count satisfies pred}`.
    pub fn probability_where(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.probabilities.iter().enumerate().filter(|(k, _)| pred(*k)).map(|(_, p)| p).sum()
    }

    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probabilities.iter().enumerate().map(|(k, p)| p * f(k)).sum()
    }
}

/// Poisson-binomial law by the O(n^2) convolution recurrence.
pub fn exact_vote_distribution(p: &[f64]) -> Result<VoteDistribution> {
    if let Some(&bad) = p.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(Error::FamilyRange(bad));
    }
    let mut dist = vec![0.0; p.len() + 1];
    dist[0] = 1.0;
    for (i, &q) in p.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            dist[k] = dist[k] * (1.0 - q) + dist[k - 1] * q;
        }
        dist[0] *= 1.0 - q;
    }
    Ok(VoteDistribution { probabilities: dist })
}

/// Exact conditional risk at a single query point given the trained
/// network: probability of error for the classification protocol without
/// abstention, conditional mean squared error `E[(eta_hat(x) - Y)^2 | x]`
/// for the regression protocols. Sensor coins are integrated out.
pub fn exact_conditional_error_at_x(network: &NetworkState, scenario: &Scenario, x: &[f64]) -> Result<f64> {
    let eta = scenario.regression_function(x);
    let data = |i: usize| network.sensors()[i].datum.as_ref().ok_or_else(|| Error::Config("untrained sensor".into()));
    match network.protocol() {
        Protocol::ClsNoAbstain => {
            let mut p = Vec::with_capacity(network.len());
            for (i, s) in network.sensors().iter().enumerate() {
                let e = data(i)?;
                p.push(if within(&e.x, x, network.r_n()) {
                    f64::from(e.label())
                } else {
                    match (network.coin_mode(), s.fixed_coin) {
                        (CoinMode::PerSensor, Some(bit)) => f64::from(u8::from(bit)),
                        _ => 0.5,
                    }
                });
            }
            let n = p.len();
            let dist = exact_vote_distribution(&p)?;
            let p_one = dist.probability_where(|k| 2 * k > n);
            Ok(p_one * (1.0 - eta) + (1.0 - p_one) * eta)
        }
        Protocol::RegAbstain | Protocol::RegNoAbstain => {
            let mut p = Vec::new();
            let scale = match network.protocol() {
                Protocol::RegAbstain => {
                    for i in 0..network.len() {
                        let e = data(i)?;
                        if within(x, &e.x, network.r_n()) {
                            p.push(reg_abstain_vote_probability(e.y, network.c_n()));
                        }
                    }
                    network.c_n()
                }
                _ => {
                    let spec = network.family().expect("family");
                    for i in 0..network.len() {
                        let e = data(i)?;
                        p.push(spec.family().probability(x, &e.x, e.y));
                    }
                    spec.scale()
                }
            };
            let m = p.len();
            let dist = exact_vote_distribution(&p)?;
            let estimate = |k: usize| if m == 0 { 0.0 } else { 2.0 * scale * (k as f64 / m as f64 - 0.5) };
            let bias_var = dist.expect(|k| (estimate(k) - eta).powi(2));
            Ok(bias_var + scenario.conditional_variance(x))
        }
        p => Err(Error::Unsupported(p.id().to_string())),
    }
}
