use proptest::prelude::*;
use restlab_core::arith::*;

fn sieve(limit: usize) -> Vec<bool> {
    let mut is = vec![true; limit + 1];
    is[0] = false;
    if limit >= 1 {
        is[1] = false;
    }
    let mut i = 2;
    while i * i <= limit {
        if is[i] {
            let mut j = i * i;
            while j <= limit {
                is[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is
}

#[test]
fn primality_and_ranges_match_a_sieve() {
    let s = sieve(20_000);
    for q in 0..=20_000u64 {
        assert_eq!(is_prime(q), s[q as usize], "q={q}");
    }
    let ps = primes_in(1000, 2000).unwrap();
    let expect: Vec<u64> = (1000..2000).filter(|&q| s[q as usize]).collect();
    assert_eq!(ps, expect);
}

#[test]
fn large_primes() {
    // 2^61 − 1 and a Carmichael number.
    assert!(is_prime((1u64 << 61) - 1));
    assert!(!is_prime(561));
    assert!(!is_prime(3_215_031_751));
}

#[test]
fn totient_and_mobius_by_counting() {
    for q in 1..=500u64 {
        let phi = (1..=q).filter(|&k| gcd(k, q) == 1).count() as u64;
        assert_eq!(euler_phi(q), phi, "q={q}");
        // Σ_{d | q} μ(d) = [q = 1].
        let s: i64 = (1..=q).filter(|d| q % d == 0).map(mobius).sum();
        assert_eq!(s, (q == 1) as i64);
    }
}

#[test]
fn jacobi_matches_legendre_products() {
    let s = sieve(200);
    for q in (3..200u64).step_by(2) {
        let f = factorize(q);
        for a in -30i64..30 {
            let mut expect = 1i64;
            for &(p, e) in &f {
                let r = a.rem_euclid(p as i64) as u64;
                let leg: i64 = if r == 0 {
                    0
                } else if (1..p).any(|k| k * k % p == r) {
                    1
                } else {
                    -1
                };
                expect *= leg.pow(e);
            }
            assert_eq!(jacobi_symbol(a, q).unwrap() as i64, expect, "a={a} q={q}");
        }
        assert!(s[q as usize] == (f.len() == 1 && f[0].1 == 1));
    }
}

proptest! {
    #[test]
    fn inverse_is_an_inverse(x in -1_000_000i64..1_000_000, q in 2u64..100_000) {
        match mod_inverse(x, q) {
            Ok(r) => prop_assert_eq!(reduce(x as i128 * r.value() as i128, q), 1),
            Err(_) => prop_assert!(gcd_signed(x, q) > 1),
        }
    }

    #[test]
    fn pow_mod_matches_repeated_multiplication(b in 0u64..1_000_000, e in 0u64..200, q in 1u64..1_000_000) {
        let mut acc = 1u128 % q as u128;
        for _ in 0..e {
            acc = acc * b as u128 % q as u128;
        }
        prop_assert_eq!(pow_mod(b, e, q) as u128, acc);
    }

    #[test]
    fn factorization_multiplies_back(q in 1u64..10_000_000) {
        let f = factorize(q);
        let prod: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
        prop_assert_eq!(prod, q);
        prop_assert!(f.iter().all(|&(p, _)| is_prime(p)));
        prop_assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn square_roots_square(p_idx in 0usize..200, a in 0u64..1_000_000) {
        let ps = primes_in(3, 2000).unwrap();
        let p = ps[p_idx % ps.len()];
        let a = a % p;
        match sqrt_mod_prime(a, p) {
            Ok(r) => prop_assert_eq!(mul_mod(r, r, p), a),
            Err(_) => prop_assert_eq!(jacobi_symbol(a as i64, p).unwrap(), -1),
        }
    }

    #[test]
    fn ramanujan_sum_is_real_part_of_a_root_sum(q in 1u64..120, l in -500i64..500) {
        let direct: f64 = (1..=q)
            .filter(|&a| gcd(a, q) == 1)
            .map(|a| (std::f64::consts::TAU * a as f64 * l as f64 / q as f64).cos())
            .sum();
        prop_assert!((ramanujan_sum(q, l) as f64 - direct).abs() < 1e-8);
    }
}
