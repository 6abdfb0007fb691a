//! Mollifiers concentrated near Farey fractions and their Fourier transforms
//! at integer frequencies.

use crate::arith::{farey_set, primes_in, ramanujan_sum, FareyFraction};
use crate::bump::{annular_transform, BumpFunction};
use crate::error::{Error, Result};
use crate::quadrature::{eta_mass, eta_transform};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `η_Q = c_Q Σ_{a/q} η((t − a/q) 10Q²)` over prime moduli in `[Q, 2Q]`.
    Prime,
    /// `η_{Q,s} = Σ_{a/q} η₇((t − a/q) N 2^s)` over all moduli in `[Q, 2Q)`.
    Dyadic,
}

#[derive(Debug, Clone, Serialize)]
pub struct MollifierSpec {
    pub variant: Variant,
    pub q_param: u64,
    pub s: u32,
    pub big_n: u64,
    pub moduli: Vec<u64>,
    /// Amplitude in front of the bump sum (1 for `Dyadic`).
    pub c_q: f64,
    /// Each bump is `bump((t − a/q) · scale)`.
    pub scale: f64,
    pub fractions: Vec<FareyFraction>,
}

/// Smallest distance between neighbouring fractions on the circle, exact.
fn circular_gap(fr: &[FareyFraction]) -> Option<(u128, u128)> {
    let mut best = crate::arith::min_gap(fr);
    if fr.len() >= 2 {
        let (f, l) = (fr[0], fr[fr.len() - 1]);
        let (af, qf) = (f.numerator() as u128, f.denominator() as u128);
        let (al, ql) = (l.numerator() as u128, l.denominator() as u128);
        let wrap = (af * ql + (ql - al) * qf, qf * ql);
        best = Some(match best {
            Some(g) if g.0 * wrap.1 <= wrap.0 * g.1 => g,
            _ => wrap,
        });
    }
    best
}

/// Checks that bumps of radius `1/scale` around the fractions cannot overlap.
fn check_disjoint(fr: &[FareyFraction], scale: u128) -> Result<()> {
    if let Some((num, den)) = circular_gap(fr) {
        if num * scale <= 2 * den {
            return Err(Error::InvalidParameter(format!(
                "bump radius 1/{scale} is not below half the minimal gap {num}/{den}"
            )));
        }
    }
    Ok(())
}

impl MollifierSpec {
    /// Major-arc mollifier for `N ≤ Q ≤ N²`, normalised to unit mass.
    pub fn prime(q_param: u64, big_n: u64) -> Result<Self> {
        if big_n == 0 || q_param < big_n || q_param > big_n * big_n {
            return Err(Error::InvalidParameter(format!("need N <= Q <= N^2, got Q={q_param}, N={big_n}")));
        }
        let moduli = primes_in(q_param, 2 * q_param)?;
        if moduli.is_empty() {
            return Err(Error::EmptyModuli { lo: q_param, hi: 2 * q_param });
        }
        let fractions = farey_set(&moduli);
        let scale_int = 10 * q_param as u128 * q_param as u128;
        check_disjoint(&fractions, scale_int)?;
        let scale = scale_int as f64;
        let c_q = scale / (fractions.len() as f64 * eta_mass());
        let spec = MollifierSpec { variant: Variant::Prime, q_param, s: 0, big_n, moduli, c_q, scale, fractions };
        let mass = spec.transform(0)?;
        debug_assert!((mass - 1.0).abs() < 1e-8, "mollifier mass {mass}");
        Ok(spec)
    }

    /// Annular mollifier for `Q < N/divisor` and `Q ≤ 2^s ≤ N`.
    pub fn dyadic(q_param: u64, s: u32, big_n: u64, divisor: u64) -> Result<Self> {
        let two_s = 1u64.checked_shl(s).unwrap_or(u64::MAX);
        if q_param == 0 || q_param * divisor >= big_n || two_s < q_param || two_s > big_n {
            return Err(Error::InvalidParameter(format!(
                "need Q < N/{divisor} and Q <= 2^s <= N, got Q={q_param}, s={s}, N={big_n}"
            )));
        }
        let moduli: Vec<u64> = (q_param..2 * q_param).collect();
        let fractions = farey_set(&moduli);
        let scale_int = big_n as u128 * two_s as u128;
        check_disjoint(&fractions, scale_int)?;
        Ok(MollifierSpec {
            variant: Variant::Dyadic,
            q_param,
            s,
            big_n,
            moduli,
            c_q: 1.0,
            scale: scale_int as f64,
            fractions,
        })
    }

    pub fn bump(&self) -> BumpFunction {
        match self.variant {
            Variant::Prime => BumpFunction::ETA,
            Variant::Dyadic => BumpFunction::ANNULAR,
        }
    }

    /// Pointwise value; only the nearest fraction can contribute because the
    /// supports are disjoint.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t - t.floor();
        let fr = &self.fractions;
        if fr.is_empty() {
            return 0.0;
        }
        let idx = fr.partition_point(|f| f.value() <= t);
        let (lo, hi) = ((idx + fr.len() - 1) % fr.len(), idx % fr.len());
        let mut acc = 0.0;
        for j in if lo == hi { vec![lo] } else { vec![lo, hi] } {
            let f = fr[j];
            let mut d = t - f.value();
            d -= d.round();
            acc += self.bump().eval(d * self.scale);
        }
        self.c_q * acc
    }

    /// `∫_T η(t) e(lt) dt`, assembled from the bump transform and exact
    /// Ramanujan sums.
    pub fn transform(&self, l: i64) -> Result<f64> {
        match self.variant {
            Variant::Prime => {
                let arith: i64 = self
                    .moduli
                    .iter()
                    .filter(|&&q| l % q as i64 == 0)
                    .map(|&q| q as i64)
                    .sum::<i64>()
                    - self.moduli.len() as i64;
                Ok(self.c_q / self.scale * eta_transform(l as f64 / self.scale) * arith as f64)
            }
            Variant::Dyadic => {
                let arith: i64 = self.moduli.iter().map(|&q| ramanujan_sum(q, l)).sum();
                if arith == 0 {
                    return Ok(0.0);
                }
                Ok(annular_transform(l as f64 / self.scale)? / self.scale * arith as f64)
            }
        }
    }

    /// Breakpoints of the bump profile in units of `1/scale`.
    pub fn profile_breaks(&self) -> &'static [f64] {
        match self.variant {
            Variant::Prime => &[-1.0, 0.0, 1.0],
            Variant::Dyadic => &[-1.0, -0.5, -0.25, -0.125, 0.125, 0.25, 0.5, 1.0],
        }
    }
}

/// The family of annular mollifiers `η_{Q,s}` for dyadic `Q < N/divisor`
/// and `Q ≤ 2^s ≤ N`, together with the complementary weight `ρ`.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicLayout {
    pub big_n: u64,
    pub divisor: u64,
    pub pieces: Vec<MollifierSpec>,
    rho_hat0: f64,
}

pub const DEFAULT_DYADIC_DIVISOR: u64 = 100;

impl DyadicLayout {
    pub fn new(big_n: u64, divisor: u64) -> Result<Self> {
        if divisor == 0 {
            return Err(Error::InvalidParameter("divisor must be positive".into()));
        }
        let mut pieces = Vec::new();
        let mut q = 1u64;
        while q * divisor < big_n {
            let s0 = 64 - (q - 1).leading_zeros();
            let mut s = s0;
            while (1u64 << s) <= big_n {
                pieces.push(MollifierSpec::dyadic(q, s, big_n, divisor)?);
                s += 1;
            }
            q *= 2;
        }
        if pieces.is_empty() {
            log::warn!("no annular pieces for N={big_n} with divisor {divisor}; rho is identically 1");
        }
        let mut layout = DyadicLayout { big_n, divisor, pieces, rho_hat0: 1.0 };
        layout.rho_hat0 = layout.rho_transform(0)?;
        Ok(layout)
    }

    pub fn rho(&self, t: f64) -> f64 {
        1.0 - self.pieces.iter().map(|p| p.eval(t)).sum::<f64>()
    }

    /// `ρ̂(l) = δ_{l0} − Σ η̂_{Q,s}(l)`.
    pub fn rho_transform(&self, l: i64) -> Result<f64> {
        let mut v = if l == 0 { 1.0 } else { 0.0 };
        for p in &self.pieces {
            v -= p.transform(l)?;
        }
        Ok(v)
    }

    pub fn rho_hat0(&self) -> f64 {
        self.rho_hat0
    }

    /// `α_{Q,s} = η̂_{Q,s}(0) / ρ̂(0)`.
    pub fn alpha(&self, index: usize) -> Result<f64> {
        Ok(self.pieces[index].transform(0)? / self.rho_hat0)
    }

    /// All joints of all bump profiles in `[−1/2, 1/2]`, sorted, with the ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![-0.5, 0.5];
        for p in &self.pieces {
            for f in &p.fractions {
                for b in p.profile_breaks() {
                    let mut t = f.value() + b / p.scale;
                    t -= t.round();
                    pts.push(t);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;
    use num_complex::Complex64;

    #[test]
    fn prime_has_unit_mass_and_prime_moduli() {
        let m = MollifierSpec::prime(13, 12).unwrap();
        assert_eq!(m.moduli, vec![13, 17, 19, 23]);
        assert_eq!(m.fractions.len(), 12 + 16 + 18 + 22);
        assert!((m.transform(0).unwrap() - 1.0).abs() < 1e-12);
        assert!(MollifierSpec::prime(5, 12).is_err());
    }

    #[test]
    fn prime_mass_by_quadrature() {
        let m = MollifierSpec::prime(7, 5).unwrap();
        let mut total = 0.0;
        for f in &m.fractions {
            let c = f.value();
            let h = 1.0 / m.scale;
            total += adaptive(&|t| Complex64::new(m.eval(t), 0.0), &[c - h, c, c + h], h, 1e-14)
                .unwrap()
                .value
                .re;
        }
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dyadic_plateau_and_support() {
        let m = MollifierSpec::dyadic(1, 2, 12, 8).unwrap();
        assert_eq!(m.fractions.len(), 1);
        assert_eq!(m.eval(0.3 / m.scale), 1.0);
        assert_eq!(m.eval(-0.3 / m.scale), 1.0);
        assert_eq!(m.eval(0.0), 0.0);
        assert_eq!(m.eval(1.5 / m.scale), 0.0);
        assert!(MollifierSpec::dyadic(1, 2, 12, 100).is_err());
    }

    #[test]
    fn layout_for_small_n() {
        let l = DyadicLayout::new(12, 8).unwrap();
        assert_eq!(l.pieces.len(), 4);
        assert!(DyadicLayout::new(12, 100).unwrap().pieces.is_empty());
        let big = DyadicLayout::new(64, 8).unwrap();
        let qs: Vec<u64> = big.pieces.iter().map(|p| p.q_param).collect();
        assert!(qs.contains(&4) && !qs.contains(&8));
    }
}
