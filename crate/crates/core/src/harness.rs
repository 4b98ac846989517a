//! Monte Carlo estimation of `E{L_n}` and convergence sweeps.
//!
//! Training data and coins for a replication are keyed by
//! `(master seed, n, replication)`; test draws by `(master seed, replication)`.
//! Replications run independently and are reduced in index order, so the
//! output does not depend on how many threads ran the work.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{train_network, NetworkState, TrainOptions};
use crate::protocol::{validate_schedule, CoinMode, Label, Protocol, Schedule};
use crate::scenario::{Scenario, Task, DEFAULT_MAX_REJECTS};
use crate::seed;

const TRAIN_TAG: u64 = 1;
const COIN_TAG: u64 = 2;
const TEST_TAG: u64 = 3;

/// z-value of a two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub scenario: Scenario,
    pub schedule: Schedule,
    pub n_grid: Vec<u64>,
    pub replications: u32,
    pub test_points: u32,
    pub master_seed: u64,
    pub coin_mode: CoinMode,
    pub default_label: Label,
    pub max_rejects: u32,
}

impl ExperimentConfig {
    pub fn new(protocol: Protocol, scenario: Scenario, schedule: Schedule, n_grid: Vec<u64>) -> Self {
        Self {
            protocol,
            scenario,
            schedule,
            n_grid,
            replications: 20,
            test_points: 2000,
            master_seed: 0,
            coin_mode: CoinMode::PerSensor,
            default_label: 0,
            max_rejects: DEFAULT_MAX_REJECTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications: must be >= 1".into()));
        }
        if self.test_points == 0 {
            return Err(Error::Config("test_points: must be >= 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid: must not be empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid: must be strictly increasing".into()));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::Config("n_grid: sizes must be positive".into()));
        }
        if self.max_rejects == 0 {
            return Err(Error::Config("max_rejects: must be >= 1".into()));
        }
        if self.default_label > 1 {
            return Err(Error::Config("default_label: must be 0 or 1".into()));
        }
        if self.protocol.task() != self.scenario.task() {
            return Err(Error::Config(format!(
                "protocol: `{}` cannot run on {:?} scenario `{}`",
                self.protocol,
                self.scenario.task(),
                self.scenario
            )));
        }
        self.schedule.check()
    }

    fn train_options(&self, n: u64, replication: u32) -> TrainOptions {
        TrainOptions {
            seed: seed::derive(self.master_seed, &[TRAIN_TAG, n, u64::from(replication)]),
            coin_seed: seed::derive(self.master_seed, &[COIN_TAG, n, u64::from(replication)]),
            coin_mode: self.coin_mode,
            default_label: self.default_label,
            max_rejects: self.max_rejects,
        }
    }

    /// Test draws depend on the replication but not on `n`, so every size
    /// in a sweep is scored on the same test sample and differences across
    /// the grid are not swamped by label noise.
    fn test_stream(&self, replication: u32) -> seed::StreamRng {
        seed::stream(self.master_seed, &[TEST_TAG, u64::from(replication)])
    }
}

/// Monte Carlo estimate of `L_n` for one trained network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRisk {
    pub risk: f64,
    /// Fraction of (sensor, query) pairs that abstained.
    pub abstain_rate: f64,
    /// Fraction of queries where no sensor voted.
    pub all_abstain_frac: f64,
}

fn loss(task: Task, prediction: f64, y: f64) -> f64 {
    match task {
        Task::Classification => f64::from(u8::from((prediction >= 0.5) != (y >= 0.5))),
        Task::Regression => (prediction - y) * (prediction - y),
    }
}

/// Estimates `L_n` from `test_points` fresh draws `(X, Y)`; query `t` uses
/// coin addresses `(sensor, t)`.
pub fn evaluate_conditional_risk<R: Rng + ?Sized>(
    network: &NetworkState,
    scenario: &Scenario,
    test_points: u32,
    rng: &mut R,
) -> Result<ConditionalRisk> {
    let task = network.protocol().task();
    let (mut total, mut abstains, mut silent) = (0.0, 0u64, 0u32);
    for t in 0..test_points {
        let e = scenario.sample(rng);
        let out = network.query(&e.x, u64::from(t))?;
        total += loss(task, out.value, e.y);
        abstains += out.tally.abstains;
        silent += u32::from(out.all_abstain);
    }
    let t = f64::from(test_points);
    let pairs = network.len() as f64 * t;
    Ok(ConditionalRisk {
        risk: total / t,
        abstain_rate: if pairs > 0.0 { abstains as f64 / pairs } else { 0.0 },
        all_abstain_frac: f64::from(silent) / t,
    })
}

/// Mean loss and its standard error over `queries` repeated queries at a
/// fixed point `x`, with `Y` drawn from `P(Y | X = x)` each time.
pub fn monte_carlo_error_at_x<R: Rng + ?Sized>(
    network: &NetworkState,
    scenario: &Scenario,
    x: &[f64],
    queries: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let task = network.protocol().task();
    let (mut s, mut s2) = (0.0, 0.0);
    for q in 0..queries {
        let v = loss(task, network.query(x, q)?.value, scenario.sample_label(x, rng));
        s += v;
        s2 += v * v;
    }
    let m = queries as f64;
    let mean = s / m;
    let var = (s2 / m - mean * mean).max(0.0);
    Ok((mean, (var / m).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub protocol: Protocol,
    pub scenario: String,
    pub d: usize,
    pub n: u64,
    pub r_n: f64,
    pub c_n: f64,
    pub schedule_validity: String,
    pub replications: u32,
    pub test_points: u32,
    /// Estimate of `E{L_n}`.
    pub risk_mean: f64,
    pub risk_se: f64,
    /// Set when `replications == 1`; `risk_se` is then reported as zero.
    pub se_degenerate: bool,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bayes_risk: f64,
    pub excess_risk: f64,
    pub bits_per_query: f64,
    pub abstain_rate: f64,
    pub all_abstain_frac: f64,
    pub untrainable_mean: f64,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl RiskReport {
    pub fn ci_half_width(&self) -> f64 {
        Z_95 * self.risk_se
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

struct Replication {
    risk: ConditionalRisk,
    untrainable: usize,
    probe_abs_mean: f64,
}

fn replicate(config: &ExperimentConfig, n: u64, replication: u32, probes: &[Point]) -> Result<Replication> {
    let opts = config.train_options(n, replication);
    let net = train_network(config.protocol, &config.scenario, n as usize, &config.schedule, &opts)?;
    let mut rng = config.test_stream(replication);
    let risk = evaluate_conditional_risk(&net, &config.scenario, config.test_points, &mut rng)?;
    let mut probe_abs = 0.0;
    for (j, x) in probes.iter().enumerate() {
        probe_abs += net.query(x, u64::from(config.test_points) + j as u64)?.value.abs();
    }
    let probe_abs_mean = if probes.is_empty() { 0.0 } else { probe_abs / probes.len() as f64 };
    Ok(Replication { risk, untrainable: net.untrainable(), probe_abs_mean })
}

fn estimate_with_probes(config: &ExperimentConfig, n: u64, probes: &[Point]) -> Result<(RiskReport, f64)> {
    config.validate()?;
    let start = Instant::now();
    let reps: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|rep| replicate(config, n, rep, probes))
        .collect::<Result<_>>()?;
    let risks: Vec<f64> = reps.iter().map(|r| r.risk.risk).collect();
    let (risk_mean, risk_se) = mean_and_se(&risks);
    let r = reps.len() as f64;
    let abstain_rate = reps.iter().map(|r| r.risk.abstain_rate).sum::<f64>() / r;
    let all_abstain_frac = reps.iter().map(|r| r.risk.all_abstain_frac).sum::<f64>() / r;
    let untrainable_mean = reps.iter().map(|r| r.untrainable as f64).sum::<f64>() / r;
    let probe_mean = reps.iter().map(|r| r.probe_abs_mean).sum::<f64>() / r;
    let bayes_risk = config.scenario.bayes_risk()?;
    let (r_n, c_n) = config.schedule.eval(n)?;
    let excess_risk = risk_mean - bayes_risk;
    let verdict = validate_schedule(&config.schedule, config.protocol, config.scenario.dimension());
    if !verdict.is_satisfied() {
        log::warn!("{} at n={n}: schedule {}: {verdict:?}", config.protocol, verdict.tag());
    }
    if risk_se > 0.0 && excess_risk < -3.0 * risk_se {
        log::warn!(
            "{} on {} at n={n}: excess risk {excess_risk} is below -3 SE ({risk_se}); check the Bayes oracle",
            config.protocol,
            config.scenario
        );
    }
    let report = RiskReport {
        protocol: config.protocol,
        scenario: config.scenario.id().to_string(),
        d: config.scenario.dimension(),
        n,
        r_n,
        c_n,
        schedule_validity: verdict.tag().to_string(),
        replications: config.replications,
        test_points: config.test_points,
        risk_mean,
        risk_se,
        se_degenerate: config.replications == 1,
        ci_low: risk_mean - Z_95 * risk_se,
        ci_high: risk_mean + Z_95 * risk_se,
        bayes_risk,
        excess_risk,
        bits_per_query: config.protocol.bits_per_query(),
        abstain_rate,
        all_abstain_frac,
        untrainable_mean,
        seed: config.master_seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((report, probe_mean))
}

/// Estimates `E{L_n}` by averaging `L_n` over independent replications.
pub fn estimate_expected_risk(config: &ExperimentConfig, n: u64) -> Result<RiskReport> {
    estimate_with_probes(config, n, &[]).map(|(r, _)| r)
}

/// One report per network size in the grid.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<RiskReport>> {
    config.validate()?;
    config.n_grid.iter().map(|&n| estimate_expected_risk(config, n)).collect()
}

/// Bits per sensor per query for a protocol id.
pub fn bits_accounting(protocol: &str) -> Result<f64> {
    Ok(protocol.parse::<Protocol>()?.bits_per_query())
}

/// Outcome of the regression-without-abstention experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub sweep: Vec<RiskReport>,
    /// Same scenario and schedule with the abstaining regression protocol.
    pub contrast: Vec<RiskReport>,
    /// Mean `|eta_hat(x)|` over the probe grid at the largest `n`.
    pub mean_abs_estimate: f64,
    pub grid_points: usize,
    pub terminal_mse: f64,
    pub terminal_excess: f64,
    /// `E{Y^2}`: the risk of predicting zero everywhere.
    pub second_moment: f64,
    /// `E{Y^2} - L*`, the excess the sweep is expected to settle at.
    pub predicted_plateau: f64,
    pub contrast_terminal_excess: f64,
}

/// Runs the regression protocol without abstention against its abstaining
/// counterpart on the same scenario and schedule.
///
/// With a fixed `c` and a shrinking ball, almost every sensor guesses, the
/// mean vote tends to 1/2 and the scaled-mean estimate collapses to 0, so
/// the risk settles near `E{Y^2}` instead of `L*`.
pub fn impossibility_demo(config: &ExperimentConfig, grid_points: usize) -> Result<DemoReport> {
    if config.protocol != Protocol::RegNoAbstain {
        return Err(Error::Config(format!("protocol: demo needs reg_noabstain, got `{}`", config.protocol)));
    }
    config.validate()?;
    let d = config.scenario.dimension();
    if d != 1 {
        return Err(Error::Config("scenario: demo probe grid needs a one-dimensional scenario".into()));
    }
    let probes: Vec<Point> = match grid_points {
        0 => Vec::new(),
        1 => vec![Point::from(0.5)],
        g => (0..g).map(|j| Point::from(j as f64 / (g - 1) as f64)).collect(),
    };
    let (&last, rest) = config.n_grid.split_last().expect("validated non-empty grid");
    let mut sweep: Vec<RiskReport> =
        rest.iter().map(|&n| estimate_expected_risk(config, n)).collect::<Result<_>>()?;
    let (terminal, mean_abs_estimate) = estimate_with_probes(config, last, &probes)?;
    sweep.push(terminal.clone());

    let contrast_config = ExperimentConfig { protocol: Protocol::RegAbstain, ..config.clone() };
    let contrast = run_sweep(&contrast_config)?;
    let second_moment = config.scenario.label_second_moment()?;
    let bayes = config.scenario.bayes_risk()?;
    Ok(DemoReport {
        mean_abs_estimate,
        grid_points: probes.len(),
        terminal_mse: terminal.risk_mean,
        terminal_excess: terminal.excess_risk,
        second_moment,
        predicted_plateau: second_moment - bayes,
        contrast_terminal_excess: contrast.last().map(|r| r.excess_risk).unwrap_or(f64::NAN),
        sweep,
        contrast,
    })
}
