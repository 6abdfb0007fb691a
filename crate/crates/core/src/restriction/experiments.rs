//! Growth-exponent experiments across a grid of shells.

use super::{
    evaluate, exponent_fit, level_sets_from_samples, make_coefficients_tagged, norm_from_samples, CoeffKind,
    CoefficientVector, Fit, NormEstimate, Sampler,
};
use crate::error::{Error, Result};
use crate::kernel::kernel_direct;
use crate::report::{num_row, ExperimentReport};
use crate::rng;
use crate::sphere::{enumerate_shell, shell_count, SphereShell};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// How a range of λ is turned into a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LambdaRule {
    /// For each power of two `2^k` in range, the smallest `λ ≥ 2^k` (below
    /// `2^{k+1}`) whose shell has at least `factor · N^{n−2}` points.
    Dyadic { factor: f64 },
    /// The powers of two themselves, empty shells skipped.
    Powers,
}

impl LambdaRule {
    pub fn describe(&self) -> String {
        match self {
            LambdaRule::Dyadic { factor } => {
                format!("for each 2^k in range, smallest lambda >= 2^k with |F| >= {factor} * N^(n-2), N = floor(sqrt(lambda)) + 1")
            }
            LambdaRule::Powers => "powers of two in range with nonempty shells".into(),
        }
    }
}

impl Default for LambdaRule {
    fn default() -> Self {
        LambdaRule::Dyadic { factor: 0.25 }
    }
}

pub fn select_lambdas(n: usize, lo: u64, hi: u64, rule: LambdaRule) -> Result<Vec<u64>> {
    if lo == 0 || hi < lo {
        return Err(Error::EmptyRange { lo, hi });
    }
    let mut out = Vec::new();
    let mut k = 64 - (lo - 1).leading_zeros();
    while (1u64 << k) <= hi {
        let base = 1u64 << k;
        match rule {
            LambdaRule::Powers => {
                if shell_count(n, base)? > 0 {
                    out.push(base);
                } else {
                    log::warn!("skipping lambda={base}: empty shell");
                }
            }
            LambdaRule::Dyadic { factor } => {
                let found = (base..2 * base).find(|&l| {
                    let big_n = crate::sphere::radius_bound(l) as f64;
                    shell_count(n, l).map(|c| c as f64 >= factor * big_n.powi(n as i32 - 2)).unwrap_or(false)
                });
                match found {
                    Some(l) => out.push(l),
                    None => log::warn!("no admissible lambda in [{base}, {})", 2 * base),
                }
            }
        }
        k += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthConfig {
    pub n: usize,
    pub p: f64,
    pub lambdas: Vec<u64>,
    pub lambda_rule: String,
    pub samples: usize,
    pub draws: usize,
    pub seed: u64,
    pub sampler: SamplerChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    Uniform,
    Peaked,
}

impl SamplerChoice {
    fn for_shell(self, shell: &SphereShell) -> Sampler {
        match self {
            SamplerChoice::Uniform => Sampler::Uniform,
            SamplerChoice::Peaked => Sampler::peaked_for(shell.big_n()),
        }
    }
}

pub use SamplerChoice as Sampling;

/// `max(0, (n−2)/2 − n/p)`: the growth exponent of `M_{p,2,n}`.
pub fn predicted_exponent(n: usize, p: f64) -> f64 {
    ((n as f64 - 2.0) / 2.0 - n as f64 / p).max(0.0)
}

const BAND: f64 = 0.3;
const KERNEL_SLACK: f64 = 0.15;

#[derive(Serialize)]
struct NormRow {
    construction: &'static str,
    #[serde(flatten)]
    estimate: NormEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    draw: Option<usize>,
}

fn check_grid(n: usize, lambdas: &[u64], samples: usize) -> Result<Vec<SphereShell>> {
    if samples < super::MIN_MC_SAMPLES {
        return Err(Error::InvalidParameter(format!("need at least {} samples", super::MIN_MC_SAMPLES)));
    }
    let mut shells = Vec::new();
    for &l in lambdas {
        let s = enumerate_shell(n, l)?;
        if s.is_empty() {
            log::warn!("skipping lambda={l}: empty shell");
            continue;
        }
        shells.push(s);
    }
    Ok(shells)
}

fn random_draws(shell: &SphereShell, seed: u64, draws: usize) -> Result<Vec<CoefficientVector>> {
    (0..draws)
        .map(|d| make_coefficients_tagged(shell, CoeffKind::RandomSigns, seed, (shell.lambda() << 16) | d as u64))
        .collect()
}

/// Largest `∥F∥_p` over random sign draws and the structured constructions,
/// fitted against `N` across the λ grid.
pub fn growth_experiment(cfg: &GrowthConfig) -> Result<ExperimentReport> {
    if cfg.n < 3 {
        return Err(Error::InvalidParameter("growth experiment needs n >= 3".into()));
    }
    if cfg.p < 1.0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    let shells = check_grid(cfg.n, &cfg.lambdas, cfg.samples)?;
    if shells.len() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 nonempty shells, got {}", shells.len())));
    }
    let mut per_lambda = Vec::new();
    let mut rows = Vec::new();
    let (mut best_pts, mut kernel_pts, mut random_pts) = (Vec::new(), Vec::new(), Vec::new());
    for shell in &shells {
        let big_n = shell.big_n();
        let draws = random_draws(shell, cfg.seed, cfg.draws)?;
        let constant = vec![Complex64::new(1.0 / (shell.len() as f64).sqrt(), 0.0); shell.len()];
        let mut cols: Vec<&[Complex64]> = vec![&constant];
        cols.extend(draws.iter().map(|c| c.a.as_slice()));
        let set = evaluate(shell, &cols, &cfg.sampler.for_shell(shell), cfg.samples, cfg.seed);
        let kernel = norm_from_samples(&set, 0, cfg.p);
        let randoms: Vec<NormEstimate> = (1..set.d).map(|j| norm_from_samples(&set, j, cfg.p)).collect();
        let (best_draw, best_random) = randoms
            .iter()
            .enumerate()
            .fold((0, randoms[0]), |acc, (i, r)| if r.value > acc.1.value { (i, *r) } else { acc });
        let singleton = NormEstimate { p: cfg.p, value: 1.0, std_error: 0.0, samples: 0 };
        let max_norm = kernel.value.max(best_random.value).max(1.0);
        let alphas: Vec<f64> = (0..8).map(|j| 2f64.powi(j)).collect();
        let level_sets = level_sets_from_samples(&set, 1 + best_draw, &alphas);
        let norms = vec![
            NormRow { construction: "random_signs_best", estimate: best_random, draw: Some(best_draw) },
            NormRow { construction: "constant", estimate: kernel, draw: None },
            NormRow { construction: "singleton", estimate: singleton, draw: None },
        ];
        for r in &norms {
            let mut row = num_row(&[shell.lambda() as f64, big_n as f64, shell.len() as f64]);
            row.push(r.construction.to_string());
            row.extend(num_row(&[r.estimate.p, r.estimate.value, r.estimate.std_error]));
            rows.push(row);
        }
        per_lambda.push(json!({
            "lambda": shell.lambda(),
            "N": big_n,
            "shell_size": shell.len(),
            "max_norm": max_norm,
            "norms": norms,
            "level_sets": level_sets,
        }));
        best_pts.push((big_n as f64, max_norm));
        kernel_pts.push((big_n as f64, kernel.value));
        random_pts.push((big_n as f64, best_random.value));
        log::info!("lambda={} N={} |F|={} max norm {:.4}", shell.lambda(), big_n, shell.len(), max_norm);
    }
    let fit = exponent_fit(&best_pts)?;
    let kernel_fit = exponent_fit(&kernel_pts)?;
    let random_fit = exponent_fit(&random_pts)?;
    let predicted = predicted_exponent(cfg.n, cfg.p);
    let (lower, upper) = if predicted > 0.0 { (Some(predicted - BAND), predicted + BAND) } else { (None, BAND) };
    let in_band = fit.slope <= upper && lower.map_or(true, |lo| fit.slope >= lo);
    let kernel_min = (predicted > 0.0).then_some(predicted - KERNEL_SLACK);
    let kernel_ok = kernel_min.map_or(true, |m| kernel_fit.slope >= m);
    let mut rep = ExperimentReport::new("growth", serde_json::to_value(cfg)?);
    rep.set("per_lambda", per_lambda);
    rep.set("fit", fit);
    rep.set("kernel_fit", kernel_fit);
    rep.set("random_fit", random_fit);
    rep.set("predicted_slope", predicted);
    rep.set("band", json!({"lower": lower, "upper": upper}));
    rep.set("kernel_min_slope", kernel_min);
    rep.verdict = Some(in_band && kernel_ok);
    Ok(rep.with_table(&["lambda", "N", "shell_size", "construction", "p", "value", "std_error"], rows))
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundConfig {
    pub n: usize,
    pub lambdas: Vec<u64>,
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    pub draws: usize,
    pub seed: u64,
}

fn fit_value(f: &Fit) -> serde_json::Value {
    serde_json::to_value(f).unwrap_or_default()
}

/// The lower-bound constructions: the kernel is large near the origin, its
/// `L^p` norm grows at the predicted rate, and random signs keep
/// `∥F∥_p ≳ ∥a∥₂`.
pub fn lower_bound_suite(cfg: &LowerBoundConfig) -> Result<ExperimentReport> {
    let shells = check_grid(cfg.n, &cfg.lambdas, cfg.samples)?;
    if shells.is_empty() {
        return Err(Error::EmptyShell);
    }
    let q_dual = cfg.q / (cfg.q - 1.0);
    let predicted = (cfg.n as f64 - 2.0) / q_dual - cfg.n as f64 / cfg.p;
    let mut per_lambda = Vec::new();
    let mut rows = Vec::new();
    let mut ratio_pts = Vec::new();
    let (mut near_ok, mut random_ok) = (true, true);
    for shell in &shells {
        let big_n = shell.big_n();
        let size = shell.len() as f64;
        let mut min_near = f64::INFINITY;
        for i in 0..100u64 {
            let mut r = rng::stream(cfg.seed ^ 0x9e37_79b9, (shell.lambda() << 16) | i);
            let x: Vec<f64> = (0..cfg.n)
                .map(|_| (2.0 * r.gen::<f64>() - 1.0) / (100.0 * big_n as f64))
                .collect();
            min_near = min_near.min(kernel_direct(shell, &x).norm() / size);
        }
        near_ok &= min_near >= 0.5;
        let draws = random_draws(shell, cfg.seed, cfg.draws)?;
        let constant = vec![Complex64::new(1.0, 0.0); shell.len()];
        let mut cols: Vec<&[Complex64]> = vec![&constant];
        cols.extend(draws.iter().map(|c| c.a.as_slice()));
        let set = evaluate(shell, &cols, &Sampler::peaked_for(big_n), cfg.samples, cfg.seed);
        let kernel = norm_from_samples(&set, 0, cfg.p);
        let ratio = kernel.value / size.powf(1.0 / cfg.q);
        let best = (1..set.d).map(|j| norm_from_samples(&set, j, cfg.p).value).fold(0.0, f64::max);
        if cfg.p >= 2.0 {
            random_ok &= best >= 0.5;
        }
        ratio_pts.push((big_n as f64, ratio));
        rows.push(num_row(&[shell.lambda() as f64, big_n as f64, size, min_near, kernel.value, ratio, best]));
        per_lambda.push(json!({
            "lambda": shell.lambda(),
            "N": big_n,
            "shell_size": shell.len(),
            "min_abs_kernel_near_origin_over_size": min_near,
            "kernel_norm": kernel,
            "kernel_ratio": ratio,
            "best_random_norm": best,
        }));
    }
    let fit = if ratio_pts.len() >= 3 { Some(exponent_fit(&ratio_pts)?) } else { None };
    let slope_ok = fit.map_or(true, |f| (f.slope - predicted).abs() <= BAND);
    let mut rep = ExperimentReport::new("lower_bounds", serde_json::to_value(cfg)?);
    rep.set("per_lambda", per_lambda);
    rep.set("fit", fit.as_ref().map(fit_value));
    rep.set("predicted_slope", predicted);
    rep.set("near_origin_ok", near_ok);
    rep.set("random_signs_ok", random_ok);
    rep.set("slope_ok", slope_ok);
    rep.verdict = Some(near_ok && random_ok && slope_ok);
    Ok(rep.with_table(
        &["lambda", "N", "shell_size", "min_near_ratio", "kernel_norm", "kernel_ratio", "best_random_norm"],
        rows,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_selection_respects_threshold() {
        let ls = select_lambdas(4, 64, 4096, LambdaRule::default()).unwrap();
        assert_eq!(ls.len(), 7);
        for (k, &l) in ls.iter().enumerate() {
            assert!(l >= 64 << k && l < 128 << k);
            let big_n = crate::sphere::radius_bound(l) as f64;
            assert!(shell_count(4, l).unwrap() as f64 >= 0.25 * big_n * big_n);
        }
        let p = select_lambdas(3, 64, 512, LambdaRule::Powers).unwrap();
        assert_eq!(p, vec![64, 128, 256, 512].into_iter().filter(|&l| shell_count(3, l).unwrap() > 0).collect::<Vec<_>>());
    }

    #[test]
    fn predicted_exponents() {
        assert!((predicted_exponent(4, 8.0) - 0.5).abs() < 1e-15);
        assert_eq!(predicted_exponent(3, 3.0), 0.0);
    }
}
