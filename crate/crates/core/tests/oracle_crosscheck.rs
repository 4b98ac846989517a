use onebit_core::harness::monte_carlo_error_at_x;
use onebit_core::network::{train_network, TrainOptions};
use onebit_core::oracle::exact_conditional_error_at_x;
use onebit_core::protocol::{fuse_cls_noabstain, SensorState};
use onebit_core::{seed, CoinMode, Example, NetworkState, Point, Protocol, Scenario, Schedule};
use rand::Rng;

fn small_noabstain_network(n: usize, seed_value: u64) -> NetworkState {
    let opts = TrainOptions { coin_mode: CoinMode::PerQuery, ..TrainOptions::seeded(seed_value) };
    // Radius large enough that roughly half the sensors vote their label.
    train_network(Protocol::ClsNoAbstain, &Scenario::gaussmix_1d(), n, &Schedule::bandwidth(1.0, 0.0).unwrap(), &opts).unwrap()
}

#[test]
fn exact_error_matches_monte_carlo_at_random_points() {
    let s = Scenario::gaussmix_1d();
    let mut rng = seed::stream(21, &[]);
    for k in 0..20u64 {
        let n = rng.random_range(1..=30);
        let net = small_noabstain_network(n, 100 + k);
        let x = [rng.random_range(-2.5..2.5)];
        let exact = exact_conditional_error_at_x(&net, &s, &x).unwrap();
        let (mc, se) = monte_carlo_error_at_x(&net, &s, &x, 1_000_000, &mut seed::stream(22, &[k])).unwrap();
        assert!((exact - mc).abs() <= 0.002, "n={n} x={x:?}: exact {exact}, mc {mc}");
        assert!((exact - mc).abs() <= 3.0 * se.max(1e-6) + 1e-12, "n={n}: outside 3 SE");
    }
}

#[test]
fn exact_error_matches_per_sensor_coin_simulation() {
    // Same check but drawing every sensor's coin individually instead of
    // the aggregated guesser count used by the query path.
    let s = Scenario::gaussmix_1d();
    let net = small_noabstain_network(15, 5);
    let x = [0.3];
    let eta = s.regression_function(&x);
    let exact = exact_conditional_error_at_x(&net, &s, &x).unwrap();
    let queries = 1_000_000u64;
    let mut err = 0.0;
    for q in 0..queries {
        let fused = fuse_cls_noabstain(&net.responses(&x, q).unwrap()).unwrap();
        err += if fused.value == 1 { 1.0 - eta } else { eta };
    }
    let mc = err / queries as f64;
    assert!((exact - mc).abs() <= 0.002, "exact {exact}, mc {mc}");
}

#[test]
fn unanimous_correct_network_never_errs() {
    let s = onebit_core::Scenario::ConstantLabel { dim: 1, label: 1 };
    let sensors: Vec<_> = (0..10).map(|i| SensorState::trained(Example::new(Point::from(0.5 + 0.01 * i as f64), 1.0))).collect();
    let net = NetworkState::from_sensors(Protocol::ClsNoAbstain, 1, sensors, 1.0, 1.0, CoinMode::PerQuery, 0, 0).unwrap();
    assert_eq!(exact_conditional_error_at_x(&net, &s, &[0.5]).unwrap(), 0.0);
}

#[test]
fn pure_guessing_at_even_odds_is_a_coin_flip() {
    let s = Scenario::gaussmix_1d();
    let sensors: Vec<_> = (0..9).map(|_| SensorState::trained(Example::new(Point::from(5.0), 1.0))).collect();
    let net = NetworkState::from_sensors(Protocol::ClsNoAbstain, 1, sensors, 0.1, 1.0, CoinMode::PerQuery, 0, 0).unwrap();
    // eta(0) = 1/2 for the symmetric mixture
    assert!((exact_conditional_error_at_x(&net, &s, &[0.0]).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn regression_exact_mse_matches_monte_carlo() {
    let s = Scenario::sine_1d(0.1);
    for (k, p) in [Protocol::RegAbstain, Protocol::RegNoAbstain].into_iter().enumerate() {
        let net = train_network(p, &s, 25, &Schedule::new(0.3, 0.0, 1.5, 0.0, None).unwrap(), &TrainOptions::seeded(31)).unwrap();
        for x in [0.1, 0.45, 0.8] {
            let exact = exact_conditional_error_at_x(&net, &s, &[x]).unwrap();
            let (mc, se) = monte_carlo_error_at_x(&net, &s, &[x], 400_000, &mut seed::stream(32, &[k as u64])).unwrap();
            assert!((exact - mc).abs() <= 4.0 * se, "{p} x={x}: exact {exact}, mc {mc} (se {se})");
        }
    }
}
