//! Gauss–Legendre rules, an adaptive panel integrator and Gauss rules for the
//! bump weight `η(y) = exp(1 − 1/(1 − y²))` on `[−1, 1]`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Nodes and weights of a quadrature rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `m`-point Gauss–Legendre rule via Newton iteration on `P_m`.
pub fn gauss_legendre(m: usize) -> Rule {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 { 1.0 } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn gl16() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

/// Fixed 16-point Gauss–Legendre on `[a, b]`.
pub fn gl_panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let r = gl16();
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        s += f(c + h * x) * *w;
    }
    s * h
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub est_error: f64,
    pub evaluations: usize,
}

/// Adaptive bisection with 16-point Gauss–Legendre panels.
///
/// `breakpoints` must be increasing and include both ends; each interval is
/// first cut into panels no wider than `max_panel`, then refined until the
/// whole-vs-halves difference meets a width-proportional share of `tol`.
pub fn adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    breakpoints: &[f64],
    max_panel: f64,
    tol: f64,
) -> Result<Integral> {
    const MAX_DEPTH: u32 = 48;
    let total = breakpoints.last().unwrap() - breakpoints[0];
    if total <= 0.0 {
        return Ok(Integral { value: Complex64::new(0.0, 0.0), est_error: 0.0, evaluations: 0 });
    }
    let mut out = Integral { value: Complex64::new(0.0, 0.0), est_error: 0.0, evaluations: 0 };
    let mut stack: Vec<(f64, f64, Complex64, u32)> = Vec::new();
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let panels = ((b - a) / max_panel).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let (lo, hi) = (a + p as f64 * h, if p + 1 == panels { b } else { a + (p + 1) as f64 * h });
            let whole = gl_panel(f, lo, hi);
            out.evaluations += 16;
            stack.push((lo, hi, whole, 0));
            while let Some((lo, hi, whole, depth)) = stack.pop() {
                let mid = 0.5 * (lo + hi);
                let left = gl_panel(f, lo, mid);
                let right = gl_panel(f, mid, hi);
                out.evaluations += 32;
                let err = (left + right - whole).norm();
                let local_tol = tol * (hi - lo) / total;
                if err <= local_tol || (hi - lo) < 1e-15 * total.max(1.0) {
                    out.value += left + right;
                    out.est_error += err;
                } else if depth >= MAX_DEPTH {
                    return Err(Error::QuadratureNotConverged { tolerance: tol, estimate: err });
                } else {
                    stack.push((mid, hi, right, depth + 1));
                    stack.push((lo, mid, left, depth + 1));
                }
            }
        }
    }
    Ok(out)
}

/// `η(y) = exp(1 − 1/(1 − y²))` on `(−1, 1)`, zero outside; peak value 1.
#[inline]
pub fn eta_weight(y: f64) -> f64 {
    let d = 1.0 - y * y;
    if d <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / d).exp()
    }
}

/// Gauss rules for the weight `η` with `m` nodes, built by the discretised
/// Stieltjes procedure on a fine Gauss–Legendre grid followed by
/// Golub–Welsch.
pub fn eta_gauss_rule(m: usize) -> Rule {
    const BASE: usize = 600;
    let base = gauss_legendre(BASE);
    let y = &base.nodes;
    let w: Vec<f64> = base.weights.iter().zip(y).map(|(w, &y)| w * eta_weight(y)).collect();
    let mu0: f64 = w.iter().sum();

    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut p_prev = vec![0.0; BASE];
    let mut p = vec![1.0 / mu0.sqrt(); BASE];
    let mut b_prev = 0.0f64;
    for _ in 0..m {
        let a: f64 = (0..BASE).map(|i| w[i] * y[i] * p[i] * p[i]).sum();
        let mut next: Vec<f64> = (0..BASE)
            .map(|i| (y[i] - a) * p[i] - b_prev * p_prev[i])
            .collect();
        let norm: f64 = (0..BASE).map(|i| w[i] * next[i] * next[i]).sum::<f64>().sqrt();
        for v in next.iter_mut() {
            *v /= norm;
        }
        alpha.push(a);
        beta.push(norm);
        p_prev = std::mem::replace(&mut p, next);
        b_prev = norm;
    }
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        jac[(i, i)] = alpha[i];
        if i + 1 < m {
            jac[(i, i + 1)] = beta[i];
            jac[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Node counts for which η-weighted rules are cached.
pub const ETA_RULE_SIZES: [usize; 8] = [8, 12, 16, 24, 32, 48, 64, 96];

pub fn eta_rule(index: usize) -> &'static Rule {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    &RULES.get_or_init(|| ETA_RULE_SIZES.iter().map(|&m| eta_gauss_rule(m)).collect())[index]
}

/// Index of the smallest cached η-rule expected to integrate `η(y) e^{iωy}`
/// to near machine precision.
pub fn eta_rule_index_for(omega: f64) -> usize {
    let need = 8.0 + 0.9 * omega.abs();
    ETA_RULE_SIZES
        .iter()
        .position(|&m| m as f64 >= need)
        .unwrap_or(ETA_RULE_SIZES.len() - 1)
}

/// `∫ η`, computed once.
pub fn eta_mass() -> f64 {
    static M: OnceLock<f64> = OnceLock::new();
    *M.get_or_init(|| eta_rule(ETA_RULE_SIZES.len() - 1).weights.iter().sum())
}

/// `η̂(ξ) = ∫ η(y) e(ξy) dy`, real because `η` is even.
pub fn eta_transform(xi: f64) -> f64 {
    let omega = std::f64::consts::TAU * xi;
    let largest = *ETA_RULE_SIZES.last().unwrap() as f64;
    if 8.0 + 0.9 * omega.abs() > largest {
        let f = |y: f64| Complex64::new(eta_weight(y) * (omega * y).cos(), 0.0);
        let panel = (std::f64::consts::PI / omega.abs()).min(0.25);
        return adaptive(&f, &[-1.0, 0.0, 1.0], panel, 1e-16)
            .map(|r| r.value.re)
            .unwrap_or(0.0);
    }
    let r = eta_rule(eta_rule_index_for(omega));
    r.nodes
        .iter()
        .zip(&r.weights)
        .map(|(&y, &w)| w * (omega * y).cos())
        .sum()
}
