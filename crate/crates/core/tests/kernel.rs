use num_complex::Complex64;
use restlab_core::bump::gamma;
use restlab_core::kernel::*;
use restlab_core::numeric::e;
use restlab_core::quadrature::adaptive;
use restlab_core::rng::torus_point;
use restlab_core::sphere::{enumerate_shell, shell_count};

/// λ in the range `[√λ] + 1 = N` with the most points on the sphere.
fn rich_lambda(n: usize, big_n: u64) -> u64 {
    let lo = (big_n - 1) * (big_n - 1);
    let hi = big_n * big_n - 1;
    (lo..=hi).max_by_key(|&l| (shell_count(n, l).unwrap(), std::cmp::Reverse(l))).unwrap()
}

/// `∫_T η(t) e(lt) dt` by integrating every bump of the mollifier separately.
fn transform_by_quadrature(spec: &MollifierSpec, l: i64) -> f64 {
    let h = 1.0 / spec.scale;
    let mut total = Complex64::new(0.0, 0.0);
    for f in &spec.fractions {
        let c = f.value();
        let breaks: Vec<f64> = spec.profile_breaks().iter().map(|b| c + b * h).collect();
        let panel = (0.5 / (l.unsigned_abs() as f64).max(1.0)).min(h / 4.0);
        let g = |t: f64| e(l as f64 * t) * spec.eval(t);
        total += adaptive(&g, &breaks, panel, 1e-14).unwrap().value;
    }
    assert!(total.im.abs() < 1e-10);
    total.re
}

#[test]
fn integral_representation_is_exact() {
    for n in 1..=3usize {
        for big_n in [3u64, 5, 8, 12] {
            let lambda = rich_lambda(n, big_n);
            let shell = enumerate_shell(n, lambda).unwrap();
            let p = KernelParams::for_shell(&shell);
            assert_eq!(p.big_n, big_n);
            for i in 0..20 {
                let x = torus_point(41, i, n);
                let direct = kernel_direct(&shell, &x);
                let integral = kernel_integral(&p, &x, integral_node_threshold(&p)).unwrap().value;
                assert!((direct - integral).norm() <= 1e-6 * direct.norm().max(1e-3), "n={n} λ={lambda} x={x:?}");
                assert!(direct.im.abs() <= 1e-9 * shell.len() as f64);
            }
        }
    }
}

#[test]
fn one_dimensional_major_arc_piece_matches_swapped_sum() {
    let big_n = 12u64;
    let lambda = 121u64;
    let p = KernelParams::new(1, lambda, big_n).unwrap();
    for q in [13u64, 29] {
        let spec = MollifierSpec::prime(q, big_n).unwrap();
        let piece = kernel_piece(&spec, &p, &[0.0], QuadControl { tol: Some(1e-10), checked: true }).unwrap();
        let swapped: f64 = (-(2 * big_n as i64)..=2 * big_n as i64)
            .map(|k| gamma(k as f64 / big_n as f64) * spec.transform(k * k - lambda as i64).unwrap())
            .sum();
        assert!((piece.value.re - swapped).abs() < 1e-9, "{} vs {swapped}", piece.value.re);
        assert!(piece.value.im.abs() < 1e-9);
    }
}

#[test]
fn closed_form_transforms_match_quadrature() {
    let prime = MollifierSpec::prime(13, 12).unwrap();
    let dyadic = MollifierSpec::dyadic(1, 1, 12, 8).unwrap();
    for l in [-130i64, -17, -1, 0, 1, 13, 26, 221, 299, 1000, 1573] {
        for spec in [&prime, &dyadic] {
            let closed = spec.transform(l).unwrap();
            let quad = transform_by_quadrature(spec, l);
            assert!((closed - quad).abs() < 1e-9, "l={l} {closed} vs {quad}");
        }
    }
}

#[test]
fn fourier_inversion_in_two_dimensions() {
    let big_n = 6u64;
    let lambda = 25u64;
    let shell = enumerate_shell(2, lambda).unwrap();
    let p = KernelParams::for_shell(&shell);
    let spec = MollifierSpec::prime(7, big_n).unwrap();
    let piece = FourierPiece::KMinusKQ(&spec);
    let r = 2 * big_n as i64;
    for i in 0..5 {
        let x = torus_point(5, i, 2);
        let mut series = Complex64::new(0.0, 0.0);
        for k1 in -r..=r {
            for k2 in -r..=r {
                let c = fourier_coefficient(piece, &p, &[k1, k2]).unwrap();
                series += c * e(k1 as f64 * x[0] + k2 as f64 * x[1]);
            }
        }
        let kq = kernel_piece(&spec, &p, &x, QuadControl { tol: Some(1e-11), checked: true }).unwrap().value;
        let direct = kernel_direct(&shell, &x) - kq;
        assert!((series - direct).norm() < 1e-5, "{series} vs {direct}");
    }
}

#[test]
fn annular_pieces_and_remainder_reassemble_the_kernel() {
    let big_n = 12u64;
    let lambda = rich_lambda(3, big_n);
    let shell = enumerate_shell(3, lambda).unwrap();
    let p = KernelParams::for_shell(&shell);
    let layout = DyadicLayout::new(big_n, 8).unwrap();
    let ctl = QuadControl { tol: Some(1e-9), checked: true };
    for i in 0..6 {
        let x = torus_point(77, i, 3);
        let mut total = kernel_minor(&layout, &p, &x, Some(1e-9)).unwrap().value;
        for spec in &layout.pieces {
            total += kernel_piece(spec, &p, &x, ctl).unwrap().value;
        }
        let k = kernel_direct(&shell, &x);
        assert!((total - k).norm() <= 1e-6 * k.norm(), "{total} vs {k}");
    }
}

#[test]
fn remainder_weight_matches_its_definition() {
    let layout = DyadicLayout::new(12, 8).unwrap();
    for i in 0..1000 {
        let t = torus_point(9, i, 1)[0];
        let mut sum = 0.0;
        for s in 0..=3 {
            let mut u = t - t.round();
            u *= 12.0 * 2f64.powi(s);
            sum += restlab_core::bump::annular(u);
        }
        assert!((layout.rho(t) + sum - 1.0).abs() < 1e-10);
    }
    let g = |t: f64| Complex64::new(layout.rho(t), 0.0);
    let integral = adaptive(&g, &layout.breakpoints(), 1e-3, 1e-13).unwrap().value.re;
    assert!((integral - layout.rho_hat0()).abs() < 1e-10);
}

#[test]
fn zero_frequency_of_annular_piece_has_the_predicted_size() {
    let layout = DyadicLayout::new(64, 8).unwrap();
    for spec in &layout.pieces {
        let v = spec.transform(0).unwrap();
        let predicted = (spec.q_param * spec.q_param) as f64 / spec.scale;
        assert!(v / predicted > 0.25 && v / predicted < 4.0, "Q={} s={}", spec.q_param, spec.s);
    }
}

#[test]
fn k1_has_vanishing_mean_frequency() {
    let layout = DyadicLayout::new(12, 8).unwrap();
    let p = KernelParams::new(3, 130, 12).unwrap();
    for i in 0..layout.pieces.len() {
        let m = FourierPiece::K1(&layout, i).multiplier(0).unwrap();
        assert!(m.abs() < 1e-14);
    }
    let (sup, _) = fourier_sup(FourierPiece::KMinor(&layout), &p).unwrap();
    assert!(sup >= layout.rho_hat0() - 1e-12);
}

#[test]
fn major_arc_fourier_sup_decays_with_q() {
    let big_n = 12u64;
    let p = KernelParams::new(3, rich_lambda(3, big_n), big_n).unwrap();
    let mut prev = f64::INFINITY;
    for q in [13u64, 29, 53] {
        let spec = MollifierSpec::prime(q, big_n).unwrap();
        let (sup, _) = fourier_sup(FourierPiece::KMinusKQ(&spec), &p).unwrap();
        assert!(sup * q as f64 <= 20.0 * (big_n as f64).powf(0.2));
        assert!(sup < prev * 1.5);
        prev = sup;
    }
}

#[test]
fn sup_norm_of_kernel_is_at_least_the_shell_size() {
    let shell = enumerate_shell(3, 26).unwrap();
    let est = sup_norm_estimate(|x| kernel_direct(&shell, x).norm(), 3, shell.big_n(), &SupNormConfig::new(1000, 4));
    assert!(est.value >= shell.len() as f64 - 1e-9);
    let empty = enumerate_shell(3, 7).unwrap();
    let est = sup_norm_estimate(|x| kernel_direct(&empty, x).norm(), 3, 3, &SupNormConfig::new(1000, 4));
    assert_eq!(est.value, 0.0);
}
