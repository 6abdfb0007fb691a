use num_complex::Complex64;
use proptest::prelude::*;
use restlab_core::bump::{gamma, BumpFunction};
use restlab_core::weyl::*;

fn naive(t: f64, x: f64, big_n: u64) -> Complex64 {
    let r = 2 * big_n as i64;
    (-r..=r)
        .map(|k| {
            let kf = k as f64;
            Complex64::from_polar(gamma(kf / big_n as f64), std::f64::consts::TAU * (kf * x + kf * kf * t))
        })
        .sum()
}

#[test]
fn poisson_regression_suite_relative_error() {
    let cases = poisson_regression_suite();
    assert_eq!(cases.len(), 50);
    for (p, x) in cases {
        let d = weyl_direct_arc(&p, x, 100, BumpFunction::GAMMA);
        let v = weyl_poisson(&p, x, 100, BumpFunction::GAMMA, None).unwrap().value;
        assert!((v - d).norm() <= 1e-6 * d.norm(), "{p:?} x={x}: {v} vs {d}");
    }
}

#[test]
fn poisson_at_integer_t_is_a_single_term() {
    // q = 1: G(φ, x) = Σ_m J(x, φ, m, 1).
    let p = MajorArcPoint::new(0, 1, 3e-4).unwrap();
    let v = weyl_poisson(&p, 0.3, 40, BumpFunction::GAMMA, None).unwrap();
    let d = naive(3e-4, 0.3, 40);
    assert!((v.value - d).norm() < 1e-6 * d.norm().max(1.0));
}

#[test]
fn envelope_report_shape() {
    let rep = weyl_envelope_check(32, 200, 4).unwrap();
    assert_eq!(rep.kind, "weyl_envelope");
    assert_eq!(rep.rows.len(), 200);
    assert!(rep.get_f64("max_ratio").unwrap() >= rep.get_f64("median_ratio").unwrap());
    assert!(weyl_envelope_check(8, 10, 0).is_err());
}

proptest! {
    #[test]
    fn direct_sum_matches_naive(t in 0.0f64..1.0, x in 0.0f64..1.0, big_n in 1u64..60) {
        let d = weyl_direct(t, x, big_n, BumpFunction::GAMMA);
        prop_assert!((d - naive(t, x, big_n)).norm() < 1e-9 * (big_n as f64));
    }

    #[test]
    fn dirichlet_points_approximate(t in -3.0f64..3.0, big_n in 1u64..500) {
        let p = dirichlet_point(t, big_n);
        prop_assert!(p.q >= 1 && p.q <= big_n);
        prop_assert!(p.phi.abs() <= 1.0 / (p.q as f64 * big_n as f64) * (1.0 + 1e-9));
        let frac = (p.t() - t).rem_euclid(1.0);
        prop_assert!(frac.min(1.0 - frac) < 1e-9);
    }

    #[test]
    fn weyl_row_recurrence(t in 0.0f64..1.0, x in 0.0f64..1.0) {
        let w = restlab_core::bump::gamma_weights(25);
        let row = WeylRow::new(x, &w);
        let d = weyl_direct(t, x, 25, BumpFunction::GAMMA);
        prop_assert!((row.eval(t) - d).norm() < 1e-9);
    }
}
