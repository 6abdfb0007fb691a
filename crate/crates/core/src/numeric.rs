//! Small numeric helpers shared by the sum and kernel modules.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// `e(z) = exp(2πiz)` for a real `z`, reduced mod 1 first.
#[inline]
pub fn e(z: f64) -> Complex64 {
    let r = z - z.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// `e(num/den)` with the numerator reduced exactly modulo `den`.
#[inline]
pub fn e_ratio(num: i128, den: u64) -> Complex64 {
    let d = den as i128;
    let mut r = num.rem_euclid(d);
    if 2 * r > d {
        r -= d;
    }
    let (s, c) = (TAU * (r as f64 / den as f64)).sin_cos();
    Complex64::new(c, s)
}

/// Table of the `q`-th roots of unity `e(j/q)`, `j = 0..q`.
pub fn roots_of_unity(q: u64) -> Vec<Complex64> {
    (0..q).map(|j| e_ratio(j as i128, q)).collect()
}

/// Per-coordinate tables `e(k x_j)` for `|k| ≤ radius`, indexed `k + radius`.
pub fn phase_tables(x: &[f64], radius: i64) -> Vec<Vec<Complex64>> {
    x.iter()
        .map(|&xj| (-radius..=radius).map(|k| e(k as f64 * xj)).collect())
        .collect()
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

/// Sums a sequence of complex terms, switching to compensated accumulation
/// for long sums.
pub fn sum_terms<I>(len_hint: usize, iter: I) -> Complex64
where
    I: Iterator<Item = Complex64>,
{
    if len_hint > 1_000_000 {
        iter.collect::<CompensatedSum>().value()
    } else {
        iter.sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_ratio_reduces_exactly() {
        let a = e_ratio(1, 3);
        let b = e_ratio(1 + 3 * 1_000_000_000_000, 3);
        assert_eq!(a, b);
        assert!((e_ratio(1, 4) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((e_ratio(-1, 4) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(Complex64::new(1e16, 0.0));
        for _ in 0..1000 {
            acc.add(Complex64::new(1.0, 1e-3));
        }
        acc.add(Complex64::new(-1e16, 0.0));
        assert_eq!(acc.value().re, 1000.0);
        assert!((acc.value().im - 1.0).abs() < 1e-12);
    }
}
