//! Extensions `F(x) = Σ_ξ a_ξ e(ξ·x)` of coefficients on a lattice shell:
//! coefficient constructions, `L^p` norms and level sets by Monte Carlo or on
//! exact grids, and log-log exponent fits.

mod chain;
mod engine;
mod experiments;

pub use chain::{levelset_chain_check, ChainBounds, ChainReport, ChainTerm};
pub use engine::{evaluate, mean_and_se, Sampler, SampleSet};
pub use experiments::{
    lower_bound_suite, predicted_exponent, select_lambdas, growth_experiment, LambdaRule, LowerBoundConfig,
    Sampling, GrowthConfig,
};

use crate::error::{Error, Result};
use crate::numeric::{e_ratio, phase_tables, CompensatedSum};
use crate::rng;
use crate::sphere::{isqrt, SphereShell};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffKind {
    Singleton,
    Constant,
    RandomSigns,
    RandomGaussian,
}

impl std::str::FromStr for CoeffKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singleton" => Ok(CoeffKind::Singleton),
            "constant" => Ok(CoeffKind::Constant),
            "random_signs" | "random-signs" | "signs" => Ok(CoeffKind::RandomSigns),
            "random_gaussian" | "random-gaussian" | "gaussian" => Ok(CoeffKind::RandomGaussian),
            other => Err(Error::InvalidParameter(format!("unknown coefficient kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientVector {
    pub kind: CoeffKind,
    pub seed: u64,
    pub a: Vec<Complex64>,
    /// `∥a∥₂ = 1`; false only for the constant construction.
    pub normalized: bool,
    pub norm1: f64,
    pub norm2: f64,
}

impl CoefficientVector {
    pub fn from_values(kind: CoeffKind, seed: u64, a: Vec<Complex64>, normalized: bool) -> Self {
        let norm1 = a.iter().map(|z| z.norm()).sum();
        let norm2 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        CoefficientVector { kind, seed, a, normalized, norm1, norm2 }
    }
}

/// Stream index reserved for coefficient draws, disjoint from sample indices.
pub(crate) fn coefficient_stream(tag: u64) -> u64 {
    (1 << 62) | tag
}

pub fn make_coefficients(shell: &SphereShell, kind: CoeffKind, seed: u64) -> Result<CoefficientVector> {
    make_coefficients_tagged(shell, kind, seed, 0)
}

/// As [`make_coefficients`], drawing from the sub-stream `tag` of `seed` so
/// that independent draws can share one seed.
pub fn make_coefficients_tagged(shell: &SphereShell, kind: CoeffKind, seed: u64, tag: u64) -> Result<CoefficientVector> {
    let len = shell.len();
    if len == 0 {
        return Err(Error::EmptyShell);
    }
    let mut r = rng::stream(seed, coefficient_stream(tag));
    let (a, normalized) = match kind {
        CoeffKind::Singleton => {
            let mut a = vec![Complex64::new(0.0, 0.0); len];
            a[0] = Complex64::new(1.0, 0.0);
            (a, true)
        }
        CoeffKind::Constant => (vec![Complex64::new(1.0, 0.0); len], false),
        CoeffKind::RandomSigns => {
            let s = 1.0 / (len as f64).sqrt();
            ((0..len).map(|_| Complex64::new(if r.gen::<bool>() { s } else { -s }, 0.0)).collect(), true)
        }
        CoeffKind::RandomGaussian => {
            let raw: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
                .collect();
            let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (raw.into_iter().map(|z| z / norm).collect(), true)
        }
    };
    Ok(CoefficientVector::from_values(kind, seed, a, normalized))
}

/// Direct compensated evaluation of `F(x)`.
pub fn extension_eval(shell: &SphereShell, c: &CoefficientVector, x: &[f64]) -> Complex64 {
    if shell.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let r = isqrt(shell.lambda()) as i64;
    let tables = phase_tables(x, r);
    let mut acc = CompensatedSum::new();
    for (p, a) in shell.points().zip(&c.a) {
        let mut z = *a;
        for (j, &k) in p.iter().enumerate() {
            z *= tables[j][(k as i64 + r) as usize];
        }
        acc.add(z);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub p: f64,
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// `∥F∥_p` from a weighted sample column by the delta method.
pub fn norm_from_samples(set: &SampleSet, column: usize, p: f64) -> NormEstimate {
    let (mean, se) = set.mean_of(column, |v| v.powf(p));
    let value = mean.powf(1.0 / p);
    let std_error = if mean > 0.0 { value / (p * mean) * se } else { 0.0 };
    NormEstimate { p, value, std_error, samples: set.m }
}

pub const MIN_MC_SAMPLES: usize = 1000;

/// Monte Carlo `∥F∥_{L^p(T^n)}` over uniform samples.
pub fn lp_norm_mc(shell: &SphereShell, c: &CoefficientVector, p: f64, samples: usize, seed: u64) -> Result<NormEstimate> {
    lp_norms_mc(shell, c, &[p], samples, seed).map(|mut v| v.remove(0))
}

/// Several exponents from one set of uniform samples.
pub fn lp_norms_mc(shell: &SphereShell, c: &CoefficientVector, ps: &[f64], samples: usize, seed: u64) -> Result<Vec<NormEstimate>> {
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_MC_SAMPLES} samples")));
    }
    if ps.iter().any(|&p| p < 1.0) {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    let set = evaluate(shell, &[&c.a], &Sampler::Uniform, samples, seed);
    Ok(ps.iter().map(|&p| norm_from_samples(&set, 0, p)).collect())
}

/// Largest number of grid points [`lp_norm_grid`] will visit.
pub const GRID_BUDGET: u64 = 50_000_000;

/// Exact `∥F∥_p` for even `p` as an average over a uniform grid of side `g`.
pub fn lp_norm_grid(shell: &SphereShell, c: &CoefficientVector, p: u32, g: u64) -> Result<f64> {
    if p == 0 || p % 2 != 0 {
        return Err(Error::InvalidParameter("grid norms need an even p".into()));
    }
    if g <= 2 * p as u64 * shell.big_n() {
        return Err(Error::InvalidParameter(format!("grid side {g} must exceed 2pN = {}", 2 * p as u64 * shell.big_n())));
    }
    let n = shell.dim();
    let total = (g as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > GRID_BUDGET as u128 {
        return Err(Error::BudgetExceeded { projected: total.min(u64::MAX as u128) as u64, budget: GRID_BUDGET });
    }
    let r = isqrt(shell.lambda()) as i64;
    // e(k i / g) for every grid index i, exact reduction of the phase.
    let tables: Vec<Vec<Complex64>> = (0..g)
        .map(|i| (-r..=r).map(|k| e_ratio(k as i128 * i as i128, g)).collect())
        .collect();
    let offsets: Vec<usize> = shell.coords().iter().map(|&k| (k as i64 + r) as usize).collect();
    let rows = total as usize / g as usize;
    let partial = crate::exec::map_indexed(rows, |row| {
        let mut idx = vec![0usize; n];
        let mut rem = row;
        for slot in idx.iter_mut().skip(1) {
            *slot = rem % g as usize;
            rem /= g as usize;
        }
        let mut vals = Vec::with_capacity(g as usize);
        for i0 in 0..g as usize {
            idx[0] = i0;
            let mut acc = CompensatedSum::new();
            for (pt, a) in offsets.chunks_exact(n).zip(&c.a) {
                let mut z = *a;
                for j in 0..n {
                    z *= tables[idx[j]][pt[j]];
                }
                acc.add(z);
            }
            vals.push(acc.value().norm_sqr().powi(p as i32 / 2));
        }
        crate::exec::pairwise_sum(&vals)
    });
    let mean = crate::exec::pairwise_sum(&partial) / total as f64;
    Ok(mean.powf(1.0 / p as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSetEstimate {
    pub alpha: f64,
    pub measure: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Whether a computed `|F(x)|` lies in `E_α`. Values within rounding of `α`
/// are treated as on the boundary, so `|F| ≡ α` gives an empty set.
#[inline]
pub fn exceeds(value: f64, alpha: f64) -> bool {
    value > alpha + 1e-12 * alpha.abs().max(1.0)
}

pub fn level_sets_from_samples(set: &SampleSet, column: usize, alphas: &[f64]) -> Vec<LevelSetEstimate> {
    alphas
        .iter()
        .map(|&alpha| {
            let (measure, std_error) = set.mean_of(column, |v| if exceeds(v, alpha) { 1.0 } else { 0.0 });
            LevelSetEstimate { alpha, measure, std_error, samples: set.m }
        })
        .collect()
}

/// `|{x : |F(x)| > α}|` for each `α`, all from one pass over uniform samples.
pub fn level_set_mc(shell: &SphereShell, c: &CoefficientVector, alphas: &[f64], samples: usize, seed: u64) -> Result<Vec<LevelSetEstimate>> {
    if alphas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("alphas must be sorted ascending".into()));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!("need at least {MIN_MC_SAMPLES} samples")));
    }
    let set = evaluate(shell, &[&c.a], &Sampler::Uniform, samples, seed);
    Ok(level_sets_from_samples(&set, 0, alphas))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    /// Standard error of the slope (zero for exact fits).
    pub stderr: f64,
}

/// Least-squares line through `(log N, log value)`.
pub fn exponent_fit(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 3", points.len())));
    }
    if points.iter().any(|&(n, v)| !(n > 0.0) || !(v > 0.0)) {
        return Err(Error::DegenerateFit("values must be positive".into()));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateFit("N values must be distinct".into()));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(Fit {
        slope,
        intercept,
        residual: (ssr / k).sqrt(),
        stderr: (ssr / (k - 2.0) / sxx).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::enumerate_shell;

    #[test]
    fn singleton_has_unit_modulus() {
        let s = enumerate_shell(3, 26).unwrap();
        let c = make_coefficients(&s, CoeffKind::Singleton, 0).unwrap();
        for i in 0..50 {
            let x = rng::torus_point(2, i, 3);
            assert!((extension_eval(&s, &c, &x).norm() - 1.0).abs() < 1e-12);
        }
        let est = lp_norm_mc(&s, &c, 5.0, 1000, 1).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12 && est.std_error < 1e-12);
    }

    #[test]
    fn constant_coefficients_reproduce_the_kernel() {
        let s = enumerate_shell(4, 4).unwrap();
        let c = make_coefficients(&s, CoeffKind::Constant, 0).unwrap();
        assert!(!c.normalized);
        assert!((extension_eval(&s, &c, &[0.0; 4]).re - 24.0).abs() < 1e-12);
    }

    #[test]
    fn random_draws_are_reproducible() {
        let s = enumerate_shell(3, 29).unwrap();
        for kind in [CoeffKind::RandomSigns, CoeffKind::RandomGaussian] {
            let a = make_coefficients(&s, kind, 17).unwrap();
            let b = make_coefficients(&s, kind, 17).unwrap();
            assert_eq!(a.a, b.a);
            assert!((a.norm2 - 1.0).abs() < 1e-12);
            assert_ne!(a.a, make_coefficients(&s, kind, 18).unwrap().a);
        }
        assert!(matches!(make_coefficients(&enumerate_shell(3, 7).unwrap(), CoeffKind::Constant, 0), Err(Error::EmptyShell)));
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0].iter().map(|&n| (n, n * n)).collect();
        let f = exponent_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-9);
        let flat: Vec<(f64, f64)> = [4.0, 8.0, 16.0].iter().map(|&n| (n, 3.0)).collect();
        assert!(exponent_fit(&flat).unwrap().slope.abs() < 1e-12);
        assert!(exponent_fit(&pts[..2]).is_err());
        assert!(exponent_fit(&[(2.0, 1.0), (2.0, 2.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn level_sets_for_singleton() {
        let s = enumerate_shell(2, 5).unwrap();
        let c = make_coefficients(&s, CoeffKind::Singleton, 0).unwrap();
        let ls = level_set_mc(&s, &c, &[0.0, 0.5, 1.0], 1000, 3).unwrap();
        assert_eq!(ls[0].measure, 1.0);
        assert_eq!(ls[1].measure, 1.0);
        assert_eq!(ls[2].measure, 0.0);
        assert!(level_set_mc(&s, &c, &[1.0, 0.5], 1000, 3).is_err());
    }
}
