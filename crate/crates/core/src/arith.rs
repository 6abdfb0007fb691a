//! Exact integer and modular arithmetic.
//!
//! All modular products go through 128-bit intermediates, so moduli up to
//! `2^63` are safe without big integers.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// An element of `Z/qZ` in canonical form `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(x: i64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidParameter("modulus must be positive".into()));
        }
        Ok(Residue {
            value: reduce(x as i128, modulus),
            modulus,
        })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }
}

/// Canonical representative of `x mod q`.
#[inline]
pub fn reduce(x: i128, q: u64) -> u64 {
    x.rem_euclid(q as i128) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `gcd(|x|, q)` for a signed `x`.
pub fn gcd_signed(x: i64, q: u64) -> u64 {
    gcd(x.unsigned_abs(), q)
}

/// Inverse of `x` modulo `q` via the extended Euclidean algorithm.
pub fn mod_inverse(x: i64, q: u64) -> Result<Residue> {
    if q == 0 {
        return Err(Error::InvalidParameter("modulus must be positive".into()));
    }
    if q == 1 {
        return Ok(Residue { value: 0, modulus: 1 });
    }
    let a = reduce(x as i128, q) as i128;
    let (mut r0, mut r1) = (q as i128, a);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let t = r0 / r1;
        (r0, r1) = (r1, r0 - t * r1);
        (s0, s1) = (s1, s0 - t * s1);
    }
    if r0 != 1 {
        return Err(Error::NotInvertible { x, q });
    }
    Ok(Residue {
        value: reduce(s0, q),
        modulus: q,
    })
}

/// Jacobi symbol `(a/q)` for odd positive `q`.
pub fn jacobi_symbol(a: i64, q: u64) -> Result<i8> {
    if q == 0 || q % 2 == 0 {
        return Err(Error::EvenModulus(q));
    }
    let mut a = reduce(a as i128, q);
    let mut n = q;
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

/// Deterministic Miller–Rabin, correct for every 64-bit input.
pub fn is_prime(q: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if q < 2 {
        return false;
    }
    for p in SMALL {
        if q % p == 0 {
            return q == p;
        }
    }
    let mut d = q - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, q);
        if x == 1 || x == q - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, q);
            if x == q - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes in `[lo, hi]`, increasing. Uses a segmented sieve.
pub fn primes_in(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if hi < lo {
        return Err(Error::EmptyRange { lo, hi });
    }
    let lo = lo.max(2);
    if hi < lo {
        return Ok(Vec::new());
    }
    let root = (hi as f64).sqrt() as u64 + 1;
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            base.push(i as u64);
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
    }
    let len = (hi - lo + 1) as usize;
    let mut seg = vec![true; len];
    for &p in &base {
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut m = start;
        while m <= hi {
            seg[(m - lo) as usize] = false;
            m += p;
        }
    }
    Ok(seg
        .iter()
        .enumerate()
        .filter(|(_, &keep)| keep)
        .map(|(i, _)| lo + i as u64)
        .collect())
}

/// Prime factorisation by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut q: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            let mut e = 0;
            while q % p == 0 {
                q /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if q > 1 {
        out.push((q, 1));
    }
    out
}

pub fn euler_phi(q: u64) -> u64 {
    factorize(q)
        .into_iter()
        .fold(q, |acc, (p, _)| acc / p * (p - 1))
}

/// Möbius function.
pub fn mobius(q: u64) -> i64 {
    let f = factorize(q);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Ramanujan sum `c_q(l) = Σ_{(a,q)=1} e(la/q)`, via `Σ_{d | (q,l)} μ(q/d) d`.
pub fn ramanujan_sum(q: u64, l: i64) -> i64 {
    let g = gcd_signed(l, q);
    let mut total = 0i64;
    let mut d = 1u64;
    while d * d <= g {
        if g % d == 0 {
            total += mobius(q / d) * d as i64;
            let e = g / d;
            if e != d {
                total += mobius(q / e) * e as i64;
            }
        }
        d += 1;
    }
    total
}

/// Square root of `a` modulo an odd prime `p`. Exhaustive for small `p`,
/// Tonelli–Shanks above `10^4`.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Result<u64> {
    let a = a % p;
    if a == 0 {
        return Ok(0);
    }
    if p < 10_000 {
        return (1..p)
            .find(|&x| mul_mod(x, x, p) == a)
            .ok_or(Error::NoSquareRoot { value: a, q: p });
    }
    tonelli_shanks(a, p)
}

fn tonelli_shanks(a: u64, p: u64) -> Result<u64> {
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return Err(Error::NoSquareRoot { value: a, q: p });
    }
    if p % 4 == 3 {
        return Ok(pow_mod(a, (p + 1) / 4, p));
    }
    let mut s = p - 1;
    let mut e = 0;
    while s % 2 == 0 {
        s /= 2;
        e += 1;
    }
    let z = (2..p)
        .find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)
        .expect("odd prime has a non-residue");
    let mut x = pow_mod(a, s.div_ceil(2), p);
    let mut b = pow_mod(a, s, p);
    let mut g = pow_mod(z, s, p);
    let mut r = e;
    while b != 1 {
        let mut m = 0;
        let mut t = b;
        while t != 1 {
            t = mul_mod(t, t, p);
            m += 1;
        }
        let gs = pow_mod(g, 1 << (r - m - 1), p);
        g = mul_mod(gs, gs, p);
        x = mul_mod(x, gs, p);
        b = mul_mod(b, g, p);
        r = m;
    }
    Ok(x)
}

/// A reduced fraction `a/q` on the circle `R/Z`.
///
/// Either `1 <= a <= q-1` with `gcd(a, q) = 1`, or the single point `0/1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FareyFraction {
    a: u64,
    q: u64,
}

impl FareyFraction {
    pub fn new(a: u64, q: u64) -> Result<Self> {
        let ok = (q == 1 && a == 0) || (q >= 2 && a >= 1 && a < q && gcd(a, q) == 1);
        if !ok {
            return Err(Error::InvalidParameter(format!("{a}/{q} is not a reduced fraction")));
        }
        Ok(FareyFraction { a, q })
    }

    pub fn numerator(self) -> u64 {
        self.a
    }

    pub fn denominator(self) -> u64 {
        self.q
    }

    pub fn value(self) -> f64 {
        self.a as f64 / self.q as f64
    }
}

impl Ord for FareyFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.a as u128 * other.q as u128)
            .cmp(&(other.a as u128 * self.q as u128))
            .then(self.q.cmp(&other.q))
    }
}

impl PartialOrd for FareyFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All reduced fractions with denominator in `moduli`, sorted by value.
///
/// Repeated moduli are counted once. The cardinality is `Σ φ(q)`.
pub fn farey_set(moduli: &[u64]) -> Vec<FareyFraction> {
    let mut qs: Vec<u64> = moduli.iter().copied().filter(|&q| q >= 1).collect();
    qs.sort_unstable();
    qs.dedup();
    let mut out = Vec::new();
    for q in qs {
        if q == 1 {
            out.push(FareyFraction { a: 0, q: 1 });
            continue;
        }
        out.extend((1..q).filter(|&a| gcd(a, q) == 1).map(|a| FareyFraction { a, q }));
    }
    out.sort_unstable();
    out
}

/// Smallest distance between consecutive fractions of a sorted set, as an
/// exact fraction `(num, den)`. Returns `None` for fewer than two entries.
pub fn min_gap(sorted: &[FareyFraction]) -> Option<(u128, u128)> {
    sorted
        .windows(2)
        .map(|w| {
            let num = w[1].a as u128 * w[0].q as u128 - w[0].a as u128 * w[1].q as u128;
            (num, w[0].q as u128 * w[1].q as u128)
        })
        .min_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)))
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn jacobi_is_multiplicative(a in -500i64..500, b in -500i64..500, k in 0u64..200) {
            let q = 2 * k + 1;
            let ab = jacobi_symbol(a * b, q).unwrap();
            prop_assert_eq!(ab, jacobi_symbol(a, q).unwrap() * jacobi_symbol(b, q).unwrap());
        }

        #[test]
        fn farey_sorted_and_reduced(moduli in proptest::collection::vec(1u64..60, 1..5)) {
            let set = farey_set(&moduli);
            prop_assert!(set.windows(2).all(|w| w[0] < w[1]));
            let mut qs = moduli.clone();
            qs.sort_unstable();
            qs.dedup();
            prop_assert_eq!(set.len() as u64, qs.iter().map(|&q| euler_phi(q)).sum::<u64>());
        }
    }
}
