use onebit_core::harness::{estimate_expected_risk, run_sweep, ExperimentConfig};
use onebit_core::network::{train_network, TrainOptions};
use onebit_core::{Protocol, Scenario, Schedule};

#[test]
fn single_point_grid_gives_one_report() {
    let mut c = ExperimentConfig::new(Protocol::ClsAbstain, Scenario::checkerboard_2d(), Schedule::default(), vec![300]);
    c.replications = 2;
    c.test_points = 50;
    let r = run_sweep(&c).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].n, 300);
    assert_eq!(r[0].d, 2);
    assert_eq!(r[0].schedule_validity, "satisfies");
}

#[test]
fn invalid_schedule_still_runs() {
    let mut c = ExperimentConfig::new(Protocol::ClsNoAbstain, Scenario::gaussmix_1d(), Schedule::bandwidth(0.5, 0.75).unwrap(), vec![100, 200]);
    c.replications = 2;
    c.test_points = 50;
    let r = run_sweep(&c).unwrap();
    assert!(r.iter().all(|r| r.schedule_validity == "violates"));
}

#[test]
fn seed_changes_results_but_not_schedule_columns() {
    let mut c = ExperimentConfig::new(Protocol::RegAbstain, Scenario::sine_1d(0.1), Schedule::new(0.5, 0.3, 1.0, 0.1, None).unwrap(), vec![500]);
    c.replications = 3;
    c.test_points = 200;
    let a = estimate_expected_risk(&c, 500).unwrap();
    c.master_seed = 99;
    let b = estimate_expected_risk(&c, 500).unwrap();
    assert_ne!(a.risk_mean, b.risk_mean);
    assert_eq!((a.r_n, a.c_n, a.bayes_risk), (b.r_n, b.c_n, b.bayes_risk));
    assert_eq!(b.seed, 99);
}

#[test]
fn uniform_specialists_never_untrainable() {
    let s = onebit_core::Scenario::ConstantLabel { dim: 1, label: 0 };
    let net = train_network(Protocol::Specialists, &s, 10_000, &Schedule::bandwidth(0.1, 0.0).unwrap(), &TrainOptions::seeded(4)).unwrap();
    assert_eq!(net.untrainable(), 0);
    assert_eq!(net.len(), 10_000);
}

#[test]
fn network_records_schedule_values() {
    let sch = Schedule::new(0.5, 0.3, 2.0, 0.1, None).unwrap();
    let net = train_network(Protocol::RegAbstain, &Scenario::sine_1d(0.1), 1000, &sch, &TrainOptions::seeded(1)).unwrap();
    assert_eq!((net.r_n(), net.c_n()), sch.eval(1000).unwrap());
}
