use onebit_core::geometry::Region;
use onebit_core::quadrature::integrate;
use onebit_core::scenario::Conditional;
use onebit_core::seed;
use onebit_core::{Point, Scenario};

/// Largest gap between the empirical CDF of `xs` and `cdf`.
fn ks_one_sample(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

fn draw_x(c: onebit_core::Result<Conditional>) -> Point {
    match c.unwrap() {
        Conditional::Sample(e) => e.x,
        Conditional::Untrainable => panic!("untrainable"),
    }
}

#[test]
fn conditional_of_uniform_is_uniform_on_the_ball() {
    let s = onebit_core::Scenario::ConstantLabel { dim: 1, label: 1 };
    let region = Region::new(Point::from(0.5), 0.1);
    let mut rng = seed::stream(11, &[]);
    let mut xs: Vec<f64> = (0..100_000).map(|_| draw_x(s.sample_conditional(&region, &mut rng, 10_000))[0]).collect();
    assert!(xs.iter().all(|&x| (0.4..=0.6).contains(&x)));
    let d = ks_one_sample(&mut xs, |x| ((x - 0.4) / 0.2).clamp(0.0, 1.0));
    // Asymptotic KS critical value at alpha = 0.01.
    assert!(d < 1.628 / (1e5f64).sqrt(), "KS statistic {d}");
}

#[test]
fn direct_and_rejection_samplers_agree() {
    let s = Scenario::cityscape_2d();
    // A region hanging over the corner of the unit square.
    let region = Region::new(Point::from([0.95, 0.05]), 0.2);
    let mut rng = seed::stream(12, &[]);
    let n = 20_000;
    let direct: Vec<Point> = (0..n).map(|_| draw_x(s.sample_conditional(&region, &mut rng, 10_000))).collect();
    let reject: Vec<Point> = (0..n).map(|_| draw_x(s.sample_conditional_rejection(&region, &mut rng, 10_000))).collect();
    let crit = 1.949 * (2.0 / n as f64).sqrt();
    for axis in 0..2 {
        let mut a: Vec<f64> = direct.iter().map(|p| p[axis]).collect();
        let mut b: Vec<f64> = reject.iter().map(|p| p[axis]).collect();
        let d = ks_two_sample(&mut a, &mut b);
        assert!(d < crit, "axis {axis}: KS statistic {d} >= {crit}");
    }
    for p in direct.iter().chain(&reject) {
        assert!(region.contains(p) && p.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn gaussmix_empirical_risk_of_bayes_rule() {
    let s = Scenario::gaussmix_1d();
    let mut rng = seed::stream(13, &[]);
    let n = 1_000_000;
    let errors = (0..n)
        .filter(|_| {
            let e = s.sample(&mut rng);
            s.bayes_classifier(&e.x) != e.label()
        })
        .count();
    let l = s.bayes_risk().unwrap();
    let sd = (l * (1.0 - l) / n as f64).sqrt();
    assert!((errors as f64 / n as f64 - l).abs() < 4.0 * sd);
}

#[test]
fn sine_second_moment_matches_quadrature() {
    let s = Scenario::sine_1d(0.1);
    let direct = integrate(|x| (2.0 * std::f64::consts::PI * x).sin().powi(2), 0.0, 1.0, 1e-12).unwrap() + 0.01;
    assert!((s.label_second_moment().unwrap() - direct).abs() < 1e-9);
    assert!((direct - 0.51).abs() < 1e-9);
}

#[test]
fn every_scenario_bayes_risk_matches_quadrature() {
    for id in Scenario::IDS {
        let s = Scenario::from_params(id, &Default::default()).unwrap();
        let closed = s.bayes_risk().unwrap();
        match s.bayes_risk_numerical() {
            Ok(num) => assert!((closed - num).abs() < 1e-6, "{id}: {closed} vs {num}"),
            Err(e) => panic!("{id}: {e}"),
        }
    }
}
