//! Trained sensor networks and query evaluation.
//!
//! Queries go through [`BallIndex`] so only sensors near the query are
//! visited. Sensors outside the ball in the protocols without abstention
//! vote with a known probability, so their total is drawn in one step: from
//! the fixed coins (exactly) or as a Binomial draw on the query's own
//! stream. [`NetworkState::responses`] evaluates every sensor one by one and
//! is kept for cross-checks on small networks.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BallIndex, Region};
use crate::protocol::{
    assign_specialist_regions, fuse_cls_abstain, fuse_cls_noabstain, fuse_reg_abstain, fuse_reg_noabstain_scaledmean,
    fuse_specialist, respond_cls_abstain, respond_cls_noabstain, respond_reg_abstain, respond_reg_noabstain,
    respond_specialist, validate_schedule, CoinMode, Fused, Label, LipschitzFusionSpec, Protocol, Schedule,
    SensorResponse, SensorState, VoteTally,
};
use crate::scenario::{Conditional, Scenario, DEFAULT_MAX_REJECTS};
use crate::seed::{self, CoinSource};

const DATA_STREAM: u64 = 1;
const REGION_STREAM: u64 = 2;
const COIN_STREAM: u64 = 3;

/// Knobs for [`train_network`] beyond protocol, scenario and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainOptions {
    pub seed: u64,
    pub coin_seed: u64,
    pub coin_mode: CoinMode,
    pub default_label: Label,
    pub max_rejects: u32,
}

impl TrainOptions {
    pub fn seeded(seed: u64) -> Self {
        Self {
            seed,
            coin_seed: seed::derive(seed, &[COIN_STREAM]),
            coin_mode: CoinMode::PerSensor,
            default_label: 0,
            max_rejects: DEFAULT_MAX_REJECTS,
        }
    }
}

/// Result of one broadcast query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOutcome {
    /// Fused label (0.0 / 1.0) or regression estimate.
    pub value: f64,
    pub all_abstain: bool,
    pub tally: VoteTally,
}

#[derive(Debug, Clone)]
pub struct NetworkState {
    protocol: Protocol,
    dim: usize,
    sensors: Vec<SensorState>,
    r_n: f64,
    c_n: f64,
    coin_mode: CoinMode,
    coins: CoinSource,
    default_label: Label,
    untrainable: usize,
    fixed_ones: u64,
    family: Option<LipschitzFusionSpec>,
    index: BallIndex,
}

/// Trains a network of `n` sensors. Deterministic given `opts`.
///
/// Schedules outside the protocol's sufficient conditions are allowed and
/// only logged.
pub fn train_network(
    protocol: Protocol,
    scenario: &Scenario,
    n: usize,
    schedule: &Schedule,
    opts: &TrainOptions,
) -> Result<NetworkState> {
    if protocol.task() != scenario.task() {
        return Err(Error::Config(format!(
            "protocol `{protocol}` needs a {:?} scenario, `{scenario}` is {:?}",
            protocol.task(),
            scenario.task()
        )));
    }
    let d = scenario.dimension();
    let verdict = validate_schedule(schedule, protocol, d);
    if !verdict.is_satisfied() {
        log::debug!("{protocol} with {schedule:?} in d={d}: {verdict:?}");
    }
    // r_n, c_n are taken at n = 1 for the empty network.
    let (r_n, c_n) = schedule.eval(n.max(1) as u64)?;
    let mut data_rng = seed::stream(opts.seed, &[DATA_STREAM]);

    let mut untrainable = 0;
    let mut sensors: Vec<SensorState> = if protocol == Protocol::Specialists {
        let mut region_rng = seed::stream(opts.seed, &[REGION_STREAM]);
        let regions = assign_specialist_regions(n, d, r_n, &mut region_rng);
        regions
            .into_iter()
            .map(|region| {
                let datum = match scenario.sample_conditional(&region, &mut data_rng, opts.max_rejects)? {
                    Conditional::Sample(e) => {
                        assert!(region.contains(&e.x), "specialist datum {:?} outside its region {region:?}", e.x);
                        Some(e)
                    }
                    Conditional::Untrainable => {
                        untrainable += 1;
                        None
                    }
                };
                let Region { center, .. } = region;
                Ok(SensorState { datum, region_center: Some(center), fixed_coin: None })
            })
            .collect::<Result<_>>()?
    } else {
        (0..n).map(|_| SensorState::trained(scenario.sample(&mut data_rng))).collect()
    };

    let mut fixed_ones = 0;
    if protocol == Protocol::ClsNoAbstain && opts.coin_mode == CoinMode::PerSensor {
        let mut coin_rng = seed::stream(opts.seed, &[COIN_STREAM]);
        for s in &mut sensors {
            let bit = coin_rng.random::<f64>() < 0.5;
            fixed_ones += u64::from(bit);
            s.fixed_coin = Some(bit);
        }
    }

    let family = match protocol {
        Protocol::RegNoAbstain => Some(LipschitzFusionSpec::clipped_local(c_n, r_n)?),
        _ => None,
    };

    let index = if protocol == Protocol::Specialists {
        BallIndex::build(d, r_n, sensors.iter().map(|s| s.region_center.as_deref()))
    } else {
        BallIndex::build(d, r_n, sensors.iter().map(|s| s.datum.as_ref().map(|e| &*e.x)))
    };

    Ok(NetworkState {
        protocol,
        dim: d,
        sensors,
        r_n,
        c_n,
        coin_mode: opts.coin_mode,
        coins: CoinSource::new(opts.coin_seed),
        default_label: opts.default_label,
        untrainable,
        fixed_ones,
        family,
        index,
    })
}

impl NetworkState {
    /// Assembles a network from explicit sensor states, for tests and
    /// oracle checks.
    #[allow(clippy::too_many_arguments)]
    pub fn from_sensors(
        protocol: Protocol,
        dim: usize,
        sensors: Vec<SensorState>,
        r_n: f64,
        c_n: f64,
        coin_mode: CoinMode,
        coin_seed: u64,
        default_label: Label,
    ) -> Result<Self> {
        let family = match protocol {
            Protocol::RegNoAbstain => Some(LipschitzFusionSpec::clipped_local(c_n, r_n)?),
            _ => None,
        };
        let fixed_ones = sensors.iter().filter(|s| s.fixed_coin == Some(true)).count() as u64;
        if protocol == Protocol::ClsNoAbstain
            && coin_mode == CoinMode::PerSensor
            && sensors.iter().any(|s| s.fixed_coin.is_none())
        {
            return Err(Error::Config("per_sensor coin mode needs a fixed coin on every sensor".into()));
        }
        let index = if protocol == Protocol::Specialists {
            BallIndex::build(dim, r_n, sensors.iter().map(|s| s.region_center.as_deref()))
        } else {
            BallIndex::build(dim, r_n, sensors.iter().map(|s| s.datum.as_ref().map(|e| &*e.x)))
        };
        let untrainable = sensors.iter().filter(|s| s.datum.is_none()).count();
        Ok(Self {
            protocol,
            dim,
            sensors,
            r_n,
            c_n,
            coin_mode,
            coins: CoinSource::new(coin_seed),
            default_label,
            untrainable,
            fixed_ones,
            family,
            index,
        })
    }

    /// Replaces the response family of a regression network without
    /// abstention.
    pub fn with_family(mut self, spec: LipschitzFusionSpec) -> Result<Self> {
        if self.protocol != Protocol::RegNoAbstain {
            return Err(Error::Unsupported(self.protocol.id().to_string()));
        }
        self.family = Some(spec);
        Ok(self)
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn sensors(&self) -> &[SensorState] {
        &self.sensors
    }

    pub fn r_n(&self) -> f64 {
        self.r_n
    }

    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    pub fn coin_mode(&self) -> CoinMode {
        self.coin_mode
    }

    pub fn coins(&self) -> &CoinSource {
        &self.coins
    }

    pub fn default_label(&self) -> Label {
        self.default_label
    }

    pub fn family(&self) -> Option<&LipschitzFusionSpec> {
        self.family.as_ref()
    }

    /// Sensors whose region had no reachable probability mass.
    pub fn untrainable(&self) -> usize {
        self.untrainable
    }

    fn fresh_coin(&self, sensor: usize, query: u64) -> f64 {
        self.coins.uniform(sensor as u64, query)
    }

    fn guessing_ones(&self, query: u64, guessers: u64, p: f64) -> u64 {
        if guessers == 0 {
            return 0;
        }
        let mut rng = self.coins.query_stream(query);
        Binomial::new(guessers, p).expect("probability in [0, 1]").sample(&mut rng)
    }

    /// Fused prediction for query number `query` at point `x`.
    pub fn query(&self, x: &[f64], query: u64) -> Result<QueryOutcome> {
        let n = self.sensors.len() as u64;
        let mut tally = VoteTally::default();
        let outcome = |tally: VoteTally, fused: Fused<f64>| QueryOutcome {
            value: fused.value,
            all_abstain: fused.all_abstain,
            tally,
        };
        let as_real = |f: Fused<Label>| Fused { value: f64::from(f.value), all_abstain: f.all_abstain };
        match self.protocol {
            Protocol::ClsAbstain => {
                self.index.for_each_within(x, |i| tally.add(respond_cls_abstain(&self.sensors[i], x, self.r_n)));
                tally.abstains = n - tally.voters();
                Ok(outcome(tally, as_real(tally.majority_at_least_half(self.default_label))))
            }
            Protocol::Specialists => {
                self.index.for_each_within(x, |i| tally.add(respond_specialist(&self.sensors[i], x, self.r_n)));
                tally.abstains = n - tally.voters();
                Ok(outcome(tally, as_real(tally.majority_at_least_half(self.default_label))))
            }
            Protocol::ClsNoAbstain => {
                let mut in_ball_fixed_ones = 0u64;
                let mut err = None;
                self.index.for_each_within(x, |i| {
                    let s = &self.sensors[i];
                    match respond_cls_noabstain(s, x, self.r_n, Some(0.0)) {
                        Ok(r) => tally.add(r),
                        Err(e) => err = Some(e),
                    }
                    in_ball_fixed_ones += u64::from(s.fixed_coin == Some(true));
                });
                if let Some(e) = err {
                    return Err(e);
                }
                let guessers = n - tally.voters();
                let ones = match self.coin_mode {
                    CoinMode::PerSensor => self.fixed_ones - in_ball_fixed_ones,
                    CoinMode::PerQuery => self.guessing_ones(query, guessers, 0.5),
                };
                tally.ones += ones;
                tally.zeros += guessers - ones;
                Ok(outcome(tally, as_real(tally.strict_majority()?)))
            }
            Protocol::RegAbstain => {
                let mut err = None;
                self.index.for_each_within(x, |i| {
                    match respond_reg_abstain(&self.sensors[i], x, self.r_n, self.c_n, self.fresh_coin(i, query)) {
                        Ok(r) => tally.add(r),
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                tally.abstains = n - tally.voters();
                Ok(outcome(tally, tally.scaled_mean(self.c_n)))
            }
            Protocol::RegNoAbstain => {
                let spec = self.family.as_ref().expect("regression network without abstention has a family");
                match spec.family().background() {
                    Some((radius, p)) if radius == self.index.radius() => {
                        let mut err = None;
                        self.index.for_each_within(x, |i| {
                            match respond_reg_noabstain(&self.sensors[i], x, spec, self.fresh_coin(i, query)) {
                                Ok(r) => tally.add(r),
                                Err(e) => err = Some(e),
                            }
                        });
                        if let Some(e) = err {
                            return Err(e);
                        }
                        let guessers = n - tally.voters();
                        let ones = self.guessing_ones(query, guessers, p);
                        tally.ones += ones;
                        tally.zeros += guessers - ones;
                    }
                    _ => {
                        for (i, s) in self.sensors.iter().enumerate() {
                            tally.add(respond_reg_noabstain(s, x, spec, self.fresh_coin(i, query))?);
                        }
                    }
                }
                Ok(outcome(tally, tally.scaled_mean(spec.scale())))
            }
        }
    }

    /// Every sensor's response to query number `query`, each drawing its own
    /// coin at address `(sensor, query)`.
    pub fn responses(&self, x: &[f64], query: u64) -> Result<Vec<SensorResponse>> {
        self.sensors
            .iter()
            .enumerate()
            .map(|(i, s)| match self.protocol {
                Protocol::ClsAbstain => Ok(respond_cls_abstain(s, x, self.r_n)),
                Protocol::Specialists => Ok(respond_specialist(s, x, self.r_n)),
                Protocol::ClsNoAbstain => {
                    let fresh = (self.coin_mode == CoinMode::PerQuery).then(|| self.fresh_coin(i, query));
                    respond_cls_noabstain(s, x, self.r_n, fresh)
                }
                Protocol::RegAbstain => respond_reg_abstain(s, x, self.r_n, self.c_n, self.fresh_coin(i, query)),
                Protocol::RegNoAbstain => {
                    respond_reg_noabstain(s, x, self.family.as_ref().expect("family"), self.fresh_coin(i, query))
                }
            })
            .collect()
    }

    /// Applies this network's fusion rule to an explicit response vector.
    pub fn fuse(&self, responses: &[SensorResponse]) -> Result<Fused<f64>> {
        let as_real = |f: Fused<Label>| Fused { value: f64::from(f.value), all_abstain: f.all_abstain };
        Ok(match self.protocol {
            Protocol::ClsAbstain => as_real(fuse_cls_abstain(responses, self.default_label)),
            Protocol::Specialists => as_real(fuse_specialist(responses, self.default_label)),
            Protocol::ClsNoAbstain => as_real(fuse_cls_noabstain(responses)?),
            Protocol::RegAbstain => fuse_reg_abstain(responses, self.c_n),
            Protocol::RegNoAbstain => {
                fuse_reg_noabstain_scaledmean(responses, self.family.as_ref().expect("family").scale())?
            }
        })
    }
}
