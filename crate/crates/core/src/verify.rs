//! Built-in oracle suites, runnable from the command line.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::geometry::Point;
use crate::network::NetworkState;
use crate::oracle::{exact_vote_distribution, naive_kernel_classify};
use crate::protocol::{
    fuse_cls_abstain, fuse_cls_noabstain, fuse_reg_abstain, fuse_reg_noabstain_scaledmean, fuse_specialist,
    respond_cls_abstain, CoinMode, Fused, Label, Protocol, SensorResponse, SensorState,
};
use crate::scenario::Example;
use crate::seed;

/// Majority fusion with abstentions, as used by the abstaining classifier.
pub type MajorityFusion = fn(&[SensorResponse], Label) -> Fused<Label>;

pub const KERNEL_EQUIVALENCE: &str = "theorem1_equivalence";
pub const POISSON_BINOMIAL_ENUMERATION: &str = "poisson_binomial_enumeration";
pub const VOTE_DISTRIBUTION_NORMALIZATION: &str = "vote_distribution_normalization";
pub const FUSION_PERMUTATION_INVARIANCE: &str = "fusion_permutation_invariance";
pub const FUSION_LIPSCHITZ_BOUND: &str = "fusion_lipschitz_bound";
pub const FUSION_TIE_BREAKS: &str = "fusion_tie_breaks";

pub const SUITES: [&str; 6] = [
    KERNEL_EQUIVALENCE,
    POISSON_BINOMIAL_ENUMERATION,
    VOTE_DISTRIBUTION_NORMALIZATION,
    FUSION_PERMUTATION_INVARIANCE,
    FUSION_LIPSCHITZ_BOUND,
    FUSION_TIE_BREAKS,
];

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Randomized network configurations in the kernel-equivalence suite.
    pub configurations: usize,
    /// Random permutations / bit-string pairs per fusion rule.
    pub trials: usize,
    pub majority: MajorityFusion,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0x5eed, configurations: 1000, trials: 10_000, majority: fuse_cls_abstain }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, failures: Vec<String>, checked: usize) -> SuiteOutcome {
    match failures.first() {
        None => SuiteOutcome { name, passed: true, detail: format!("{checked} checks") },
        Some(first) => SuiteOutcome {
            name,
            passed: false,
            detail: format!("{} of {checked} checks failed; first: {first}", failures.len()),
        },
    }
}

/// Runs every suite in [`SUITES`] order.
pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteOutcome> {
    vec![
        kernel_equivalence(opts),
        poisson_binomial_enumeration(opts),
        vote_distribution_normalization(),
        fusion_permutation_invariance(opts),
        fusion_lipschitz_bound(opts),
        fusion_tie_breaks(opts),
    ]
}

/// Distributed abstaining classifier against the centralized naive kernel
/// rule on random data, random radii and random query points.
pub fn kernel_equivalence(opts: &VerifyOptions) -> SuiteOutcome {
    let mut rng = seed::stream(opts.seed, &[1]);
    let mut failures = Vec::new();
    let mut checked = 0;
    for cfg in 0..opts.configurations {
        let d = rng.random_range(1..=3usize);
        let n = rng.random_range(1..=500usize);
        let r: f64 = rng.random_range(0.0..0.5);
        let label_bias: f64 = rng.random();
        let train: Vec<Example> = (0..n)
            .map(|_| {
                // A coarse lattice makes exact ties and on-boundary points common.
                let x: Point = (0..d).map(|_| f64::from(rng.random_range(0..20u8)) / 20.0).collect();
                Example::new(x, f64::from(u8::from(rng.random_bool(label_bias))))
            })
            .collect();
        let default = u8::from(rng.random_bool(0.5));
        let sensors: Vec<SensorState> = train.iter().cloned().map(SensorState::trained).collect();
        let net = match NetworkState::from_sensors(Protocol::ClsAbstain, d, sensors, r, 1.0, CoinMode::PerSensor, 0, default) {
            Ok(net) => net,
            Err(e) => {
                failures.push(format!("config {cfg}: {e}"));
                continue;
            }
        };
        for _ in 0..10 {
            let x: Point = (0..d)
                .map(|_| if rng.random_bool(0.5) { f64::from(rng.random_range(0..20u8)) / 20.0 } else { rng.random() })
                .collect();
            let central = naive_kernel_classify(&train, &x, r, default);
            let responses: Vec<SensorResponse> = net.sensors().iter().map(|s| respond_cls_abstain(s, &x, r)).collect();
            let distributed = (opts.majority)(&responses, default).value;
            let fast = net.query(&x, 0).map(|o| o.value);
            checked += 1;
            if distributed != central || fast != Ok(f64::from(central)) {
                failures.push(format!(
                    "config {cfg} (d={d}, n={n}, r={r}): network {distributed} / {fast:?}, naive kernel {central}"
                ));
            }
        }
    }
    outcome(KERNEL_EQUIVALENCE, failures, checked)
}

fn enumerate(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut pmf = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let mut prob = 1.0;
        for (i, &pi) in p.iter().enumerate() {
            prob *= if mask & (1 << i) != 0 { pi } else { 1.0 - pi };
        }
        pmf[mask.count_ones() as usize] += prob;
    }
    pmf
}

/// Exact vote-count law against brute-force enumeration for `n <= 12`.
pub fn poisson_binomial_enumeration(opts: &VerifyOptions) -> SuiteOutcome {
    let mut rng = seed::stream(opts.seed, &[2]);
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 0..=12usize {
        for _ in 0..20 {
            let p: Vec<f64> = (0..n)
                .map(|_| match rng.random_range(0..4u8) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.random(),
                })
                .collect();
            checked += 1;
            match exact_vote_distribution(&p) {
                Ok(dist) => {
                    let brute = enumerate(&p);
                    let worst = brute.iter().zip(dist.probabilities()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    if worst > 1e-12 {
                        failures.push(format!("n={n}: max deviation {worst:e}"));
                    }
                }
                Err(e) => failures.push(format!("n={n}: {e}")),
            }
        }
    }
    outcome(POISSON_BINOMIAL_ENUMERATION, failures, checked)
}

/// The exact law sums to one for a large network.
pub fn vote_distribution_normalization() -> SuiteOutcome {
    let p: Vec<f64> = (0..10_000).map(|i| ((i * 7919) % 10_007) as f64 / 10_007.0).collect();
    let failures = match exact_vote_distribution(&p) {
        Ok(dist) => {
            let total: f64 = dist.probabilities().iter().sum();
            let mean = dist.expect(|k| k as f64);
            let expected_mean: f64 = p.iter().sum();
            let mut f = Vec::new();
            if (total - 1.0).abs() > 1e-9 {
                f.push(format!("total mass {total}"));
            }
            if (mean - expected_mean).abs() > 1e-6 * expected_mean {
                f.push(format!("mean {mean}, expected {expected_mean}"));
            }
            f
        }
        Err(e) => vec![e.to_string()],
    };
    outcome(VOTE_DISTRIBUTION_NORMALIZATION, failures, 2)
}

fn random_responses<R: Rng + ?Sized>(rng: &mut R, n: usize, abstain: bool) -> Vec<SensorResponse> {
    (0..n)
        .map(|_| match rng.random_range(0..if abstain { 3u8 } else { 2 }) {
            0 => SensorResponse::Vote0,
            1 => SensorResponse::Vote1,
            _ => SensorResponse::Abstain,
        })
        .collect()
}

/// Every fusion rule returns the same output for any reordering of the
/// responses.
pub fn fusion_permutation_invariance(opts: &VerifyOptions) -> SuiteOutcome {
    let mut rng = seed::stream(opts.seed, &[3]);
    let mut failures = Vec::new();
    let c = 1.7;
    type Rule<'a> = Box<dyn Fn(&[SensorResponse]) -> Option<(f64, bool)> + 'a>;
    let rules: [(&str, bool, Rule); 5] = [
        ("cls_abstain", true, Box::new(|r| Some((f64::from((opts.majority)(r, 0).value), false)))),
        ("cls_noabstain", false, Box::new(|r| fuse_cls_noabstain(r).ok().map(|f| (f64::from(f.value), f.all_abstain)))),
        ("reg_abstain", true, Box::new(move |r| Some(fuse_reg_abstain(r, c)).map(|f| (f.value, f.all_abstain)))),
        ("reg_noabstain", false, Box::new(move |r| fuse_reg_noabstain_scaledmean(r, c).ok().map(|f| (f.value, f.all_abstain)))),
        ("specialists", true, Box::new(|r| Some(fuse_specialist(r, 0)).map(|f| (f64::from(f.value), f.all_abstain)))),
    ];
    for (name, abstain, fuse) in &rules {
        let mut responses = random_responses(&mut rng, 1, *abstain);
        for t in 0..opts.trials {
            if t % 100 == 0 {
                let n = rng.random_range(1..=60);
                responses = random_responses(&mut rng, n, *abstain);
            }
            let before = fuse(&responses);
            responses.shuffle(&mut rng);
            let after = fuse(&responses);
            if before.is_none() || before != after {
                failures.push(format!("{name}: {before:?} became {after:?}"));
            }
        }
    }
    outcome(FUSION_PERMUTATION_INVARIANCE, failures, rules.len() * opts.trials)
}

/// Scaled-mean fusion moves by at most `2c * hamming / n` between two bit
/// strings.
pub fn fusion_lipschitz_bound(opts: &VerifyOptions) -> SuiteOutcome {
    let mut rng = seed::stream(opts.seed, &[4]);
    let mut failures = Vec::new();
    for _ in 0..opts.trials {
        let n = rng.random_range(1..=200usize);
        let c: f64 = rng.random_range(0.1..5.0);
        let a = random_responses(&mut rng, n, false);
        let flip: f64 = rng.random();
        let b: Vec<SensorResponse> = a
            .iter()
            .map(|&r| if rng.random_bool(flip) { SensorResponse::vote(r == SensorResponse::Vote0) } else { r })
            .collect();
        let hamming = a.iter().zip(&b).filter(|(x, y)| x != y).count() as f64;
        match (fuse_reg_noabstain_scaledmean(&a, c), fuse_reg_noabstain_scaledmean(&b, c)) {
            (Ok(fa), Ok(fb)) => {
                let bound = 2.0 * c * hamming / n as f64;
                if (fa.value - fb.value).abs() > bound * (1.0 + 1e-12) + 1e-15 {
                    failures.push(format!("n={n} c={c}: moved {} > {bound}", (fa.value - fb.value).abs()));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(e.to_string()),
        }
    }
    outcome(FUSION_LIPSCHITZ_BOUND, failures, opts.trials)
}

/// A split vote resolves to 1 with abstentions allowed and to 0 without.
pub fn fusion_tie_breaks(opts: &VerifyOptions) -> SuiteOutcome {
    use SensorResponse::{Abstain, Vote0, Vote1};
    let mut failures = Vec::new();
    let mut check = |what: &str, got: Option<Label>, want: Label| {
        if got != Some(want) {
            failures.push(format!("{what}: got {got:?}, want {want}"));
        }
    };
    check("abstaining majority [1,0]", Some((opts.majority)(&[Vote1, Vote0], 0).value), 1);
    check("abstaining majority [1,0,-]", Some((opts.majority)(&[Vote1, Vote0, Abstain], 0).value), 1);
    check("abstaining majority [0,0,1]", Some((opts.majority)(&[Vote0, Vote0, Vote1], 1).value), 0);
    check("abstaining majority [-,-]", Some((opts.majority)(&[Abstain, Abstain], 1).value), 1);
    check("strict majority [1,0]", fuse_cls_noabstain(&[Vote1, Vote0]).ok().map(|f| f.value), 0);
    check("strict majority [1,1,0]", fuse_cls_noabstain(&[Vote1, Vote1, Vote0]).ok().map(|f| f.value), 1);
    check("specialist [1,0]", Some(fuse_specialist(&[Vote1, Vote0], 0).value), 1);
    outcome(FUSION_TIE_BREAKS, failures, 7)
}

/// Abstaining majority with the tie resolved to 0 instead of 1. Only useful
/// as a negative control for the suites above.
#[doc(hidden)]
pub fn corrupted_tie_break(responses: &[SensorResponse], default: Label) -> Fused<Label> {
    let f = fuse_cls_abstain(responses, default);
    let tally = crate::protocol::VoteTally::from_responses(responses);
    if tally.voters() > 0 && tally.ones * 2 == tally.voters() {
        return Fused { value: 0, all_abstain: false };
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions { configurations: 100, trials: 1000, ..VerifyOptions::default() }
    }

    #[test]
    fn pristine_suites_pass() {
        for o in run_all(&quick()) {
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn suite_names_are_listed_in_order() {
        let names: Vec<_> = run_all(&quick()).into_iter().map(|o| o.name).collect();
        assert_eq!(names, SUITES);
        assert!(SUITES.contains(&"theorem1_equivalence"));
    }

    #[test]
    fn corrupted_tie_break_is_caught() {
        let opts = VerifyOptions { majority: corrupted_tie_break, ..quick() };
        let failed: Vec<_> = run_all(&opts).into_iter().filter(|o| !o.passed).map(|o| o.name).collect();
        assert!(failed.contains(&KERNEL_EQUIVALENCE));
        assert!(failed.contains(&FUSION_TIE_BREAKS));
    }
}
