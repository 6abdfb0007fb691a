use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restlab_core::arith::{gcd, mod_inverse, primes_in};
use restlab_core::exp_sums::*;

fn ephase(num: i64, q: u64) -> Complex64 {
    let r = num.rem_euclid(q as i64) as f64 / q as f64;
    Complex64::from_polar(1.0, std::f64::consts::TAU * r)
}

fn kloosterman_naive(a: i64, b: i64, q: u64) -> Complex64 {
    (1..q as i64)
        .filter(|&k| gcd(k as u64, q) == 1)
        .map(|k| {
            let kb = (1..q as i64).find(|&j| (k * j).rem_euclid(q as i64) == 1).unwrap();
            ephase(a * k + b * kb, q)
        })
        .sum()
}

#[test]
fn gauss_sum_closed_form_for_odd_moduli() {
    for q in (1..400u64).step_by(2) {
        let g = gauss_sum(q).unwrap().value;
        let expect = if q % 4 == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) } / (q as f64).sqrt();
        assert!((g - expect).norm() < 1e-10, "q={q}");
    }
}

#[test]
fn kloosterman_matches_naive_sum() {
    for q in [2u64, 3, 7, 9, 12, 25, 31] {
        for a in -3..4 {
            for b in -3..4 {
                let k = kloosterman(a, b, q).unwrap().value;
                assert!((k - kloosterman_naive(a, b, q)).norm() < 1e-9, "a={a} b={b} q={q}");
            }
        }
    }
}

#[test]
fn salie_explicit_matches_direct_on_small_primes() {
    for &q in primes_in(3, 60).unwrap().iter() {
        for a in 1..q as i64 {
            for b in 1..q as i64 {
                let d = salie_direct(a, b, q).unwrap().value;
                match salie_explicit(a, b, q) {
                    Ok(e) => assert!((d - e.value).norm() < 1e-9, "a={a} b={b} q={q}"),
                    // ab a non-residue: the sum vanishes.
                    Err(_) => assert!(d.norm() < 1e-9, "a={a} b={b} q={q}"),
                }
            }
        }
    }
}

#[test]
fn salie_five_one_one() {
    let v = salie_explicit(1, 1, 5).unwrap().value;
    assert!((v.re + 3.618_033_988_749_895).abs() < 1e-10 && v.im.abs() < 1e-12);
}

fn sigma(m: &[i64], lambda: i64, s: u64) -> Complex64 {
    singular_sigma(&SingularParams::new(m.to_vec(), lambda, s).unwrap()).unwrap().value
}

#[test]
fn sigma_multiplicativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 50 {
        let s1 = rng.gen_range(2..100u64);
        let s2 = rng.gen_range(2..100u64);
        if gcd(s1, s2) != 1 || s1 * s2 > 10_000 {
            continue;
        }
        let n = rng.gen_range(1..5usize);
        let lambda = rng.gen_range(-50..50i64);
        let zero = vec![0i64; n];
        let plain = sigma(&zero, lambda, s1 * s2);
        let prod = sigma(&zero, lambda, s1) * sigma(&zero, lambda, s2);
        assert!((plain - prod).norm() < 1e-8 * (1.0 + prod.norm()), "m=0 s1={s1} s2={s2}");

        // General m: each factor sees m scaled by the inverse of the other modulus.
        let m: Vec<i64> = (0..n).map(|_| rng.gen_range(-20..20)).collect();
        let inv2 = mod_inverse(s2 as i64, s1).unwrap().value() as i64;
        let inv1 = mod_inverse(s1 as i64, s2).unwrap().value() as i64;
        let m1: Vec<i64> = m.iter().map(|&x| x * inv2).collect();
        let m2: Vec<i64> = m.iter().map(|&x| x * inv1).collect();
        let whole = sigma(&m, lambda, s1 * s2);
        let twisted = sigma(&m1, lambda, s1) * sigma(&m2, lambda, s2);
        assert!((whole - twisted).norm() < 1e-8 * (1.0 + twisted.norm()), "m={m:?} s1={s1} s2={s2}");
        done += 1;
    }
}

#[test]
fn selberg_partial_sums_accumulate_kloosterman_terms() {
    let ps = selberg_partial(1, 1, 60).unwrap();
    assert_eq!(ps.len(), 59);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in ps.iter().enumerate() {
        let q = i as u64 + 2;
        acc += kloosterman_naive(1, 1, q) / q as f64;
        assert!((v - acc).norm() < 1e-9);
    }
}

proptest! {
    #[test]
    fn quad_sum_closed_matches_direct(a in -500i64..500, m in -500i64..500, qh in 0u64..300) {
        let q = 2 * qh + 1;
        prop_assume!(gcd(a.rem_euclid(q as i64) as u64, q) == 1);
        let d = quad_sum(a, m, q).unwrap().value;
        let c = quad_sum_closed(a, m, q).unwrap().value;
        prop_assert!((d - c).norm() < 1e-10);
    }

    #[test]
    fn quad_sum_is_periodic(a in -50i64..50, m in -50i64..50, q in 1u64..60, k in -3i64..3) {
        let d = quad_sum(a, m, q).unwrap().value;
        let shifted = quad_sum(a + k * q as i64, m - k * q as i64, q).unwrap().value;
        prop_assert!((d - shifted).norm() < 1e-12);
    }

    #[test]
    fn sigma_reduction_agrees(mh in proptest::collection::vec(-30i64..30, 1..6), lambda in -200i64..200, sh in 1u64..40) {
        let s = 2 * sh + 1;
        let p = SingularParams::new(mh, lambda, s).unwrap();
        let d = singular_sigma(&p).unwrap().value;
        let r = singular_sigma_reduced(&p).unwrap().value;
        prop_assert!((d - r).norm() < 1e-8 * (1.0 + d.norm()));
    }
}
