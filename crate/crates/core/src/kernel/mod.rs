//! The restriction kernel `K(x) = Σ_{ξ ∈ F_{n,λ}} e(ξ·x)`, its integral
//! representation through Weyl sums, and its circle-method pieces.
//!
//! Every piece is an integral of `P(t, x) = Π_j G(t, x_j) e(−λt)` against a
//! weight in `t`: the mollifier `η_Q`, an annular `η_{Q,s}`, or the remainder
//! `ρ`. Fourier coefficients follow from the weight's transform at
//! `l = |k|² − λ`.

mod mollifier;
mod supnorm;

pub use mollifier::{MollifierSpec, DyadicLayout, Variant, DEFAULT_DYADIC_DIVISOR};
pub use supnorm::{sup_norm_estimate, SupNormConfig, SupNormEstimate};

use crate::bump::gamma_weights;
use crate::error::{Error, Result};
use crate::numeric::{e, e_ratio, phase_tables, CompensatedSum};
use crate::quadrature::{adaptive, eta_rule, eta_rule_index_for, ETA_RULE_SIZES};
use crate::sphere::SphereShell;
use crate::weyl::WeylRow;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    K,
    KQ,
    KQs,
    Kminor,
    K1,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSample {
    pub piece: Piece,
    pub x: Vec<f64>,
    pub value: Complex64,
    pub quadrature_nodes: usize,
    pub est_error: f64,
}

/// Dimension, radius squared and Weyl-sum length of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelParams {
    pub n: usize,
    pub lambda: u64,
    pub big_n: u64,
}

impl KernelParams {
    /// `N` must satisfy `N² ≥ λ` so that the cutoff `γ(k/N)` equals 1 on the
    /// shell; `N = 0` is the degenerate empty cutoff.
    pub fn new(n: usize, lambda: u64, big_n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if big_n > 0 && big_n * big_n < lambda {
            return Err(Error::InvalidParameter(format!("N={big_n} is below sqrt(lambda={lambda})")));
        }
        Ok(KernelParams { n, lambda, big_n })
    }

    pub fn for_shell(shell: &SphereShell) -> Self {
        KernelParams { n: shell.dim(), lambda: shell.lambda(), big_n: shell.big_n() }
    }

    /// Largest `|l|` with `l = |k|² − λ` and `|k_i| < 2N`.
    pub fn max_frequency(&self) -> f64 {
        let top = self.n as f64 * ((2 * self.big_n).saturating_sub(1) as f64).powi(2);
        (self.lambda as f64).max(top - self.lambda as f64)
    }

    pub fn default_tolerance(&self) -> f64 {
        1e-8 * (self.big_n as f64).powi(self.n as i32)
    }
}

/// `P(t, x) = Π_j G(t, x_j)` for a fixed `x`.
struct Integrand {
    rows: Vec<WeylRow>,
    lambda: u64,
}

impl Integrand {
    fn new(p: &KernelParams, x: &[f64]) -> Self {
        let w = gamma_weights(p.big_n);
        Integrand { rows: x.iter().map(|&xj| WeylRow::new(xj, &w)).collect(), lambda: p.lambda }
    }

    #[inline]
    fn product(&self, t: f64) -> Complex64 {
        self.rows.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * r.eval(t))
    }

    /// `P(a/q + u) e(−λ(a/q + u))` with the rational phase reduced exactly.
    #[inline]
    fn at(&self, a: u64, q: u64, u: f64) -> Complex64 {
        let centre = a as f64 / q as f64;
        self.product(centre + u) * e_ratio(-(self.lambda as i128) * a as i128, q) * e(-(self.lambda as f64) * u)
    }
}

fn check_point(p: &KernelParams, x: &[f64]) -> Result<()> {
    if x.len() != p.n {
        return Err(Error::InvalidParameter(format!("point has {} coordinates, expected {}", x.len(), p.n)));
    }
    Ok(())
}

/// Direct sum over the shell.
pub fn kernel_direct(shell: &SphereShell, x: &[f64]) -> Complex64 {
    if shell.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let r = crate::sphere::isqrt(shell.lambda()) as i64;
    let tables = phase_tables(x, r);
    let mut acc = CompensatedSum::new();
    for p in shell.points() {
        let mut z = Complex64::new(1.0, 0.0);
        for (j, &c) in p.iter().enumerate() {
            z *= tables[j][(c as i64 + r) as usize];
        }
        acc.add(z);
    }
    acc.value()
}

/// Smallest node count for which [`kernel_integral`] is exact.
pub fn integral_node_threshold(p: &KernelParams) -> usize {
    4 * p.n * (2 * p.big_n as usize).pow(2) + p.lambda as usize + 1
}

/// `K(x) = ∫_0^1 P(t, x) e(−λt) dt` on a uniform grid of `nodes` points,
/// exact for a trigonometric polynomial of this degree.
pub fn kernel_integral(p: &KernelParams, x: &[f64], nodes: usize) -> Result<KernelSample> {
    check_point(p, x)?;
    let required = integral_node_threshold(p);
    if nodes < required {
        return Err(Error::InsufficientNodes { nodes, required });
    }
    let f = Integrand::new(p, x);
    let mut acc = CompensatedSum::new();
    for j in 0..nodes {
        let t = j as f64 / nodes as f64;
        acc.add(f.product(t) * e_ratio(-(p.lambda as i128) * j as i128, nodes as u64));
    }
    Ok(KernelSample {
        piece: Piece::K,
        x: x.to_vec(),
        value: acc.value() / nodes as f64,
        quadrature_nodes: nodes,
        est_error: 0.0,
    })
}

/// Accuracy control for kernel pieces.
#[derive(Debug, Clone, Copy)]
pub struct QuadControl {
    /// Absolute tolerance; `None` uses `1e−8 N^n`.
    pub tol: Option<f64>,
    /// When false, the Gauss rule is chosen from the bandwidth alone and no
    /// error estimate is formed (used inside optimisation loops).
    pub checked: bool,
}

impl Default for QuadControl {
    fn default() -> Self {
        QuadControl { tol: None, checked: true }
    }
}

fn prime_sum(spec: &MollifierSpec, f: &Integrand, rule_index: usize) -> Complex64 {
    let rule = eta_rule(rule_index);
    let h = 1.0 / spec.scale;
    let lam = f.lambda as f64;
    let tw: Vec<Complex64> = rule.nodes.iter().zip(&rule.weights).map(|(&y, &w)| e(-lam * h * y) * w).collect();
    let mut acc = CompensatedSum::new();
    for fr in &spec.fractions {
        let (a, q) = (fr.numerator(), fr.denominator());
        let centre = a as f64 / q as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for (i, &y) in rule.nodes.iter().enumerate() {
            s += f.product(centre + h * y) * tw[i];
        }
        acc.add(s * e_ratio(-(f.lambda as i128) * a as i128, q));
    }
    acc.value() * (spec.c_q * h)
}

fn dyadic_sum(spec: &MollifierSpec, p: &KernelParams, f: &Integrand, tol: f64) -> Result<(Complex64, usize, f64)> {
    let l = spec.scale;
    let panel = (l / p.max_frequency().max(1.0)).min(0.125);
    let share = tol / spec.fractions.len().max(1) as f64;
    let bump = spec.bump();
    let mut acc = CompensatedSum::new();
    let (mut evals, mut err) = (0, 0.0);
    for fr in &spec.fractions {
        let (a, q) = (fr.numerator(), fr.denominator());
        let g = |u: f64| {
            let w = bump.eval(u);
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                f.at(a, q, u / l) * (w / l)
            }
        };
        let r = adaptive(&g, spec.profile_breaks(), panel, share)?;
        acc.add(r.value);
        evals += r.evaluations;
        err += r.est_error;
    }
    Ok((acc.value(), evals, err))
}

/// `∫ P(t, x) e(−λt) η(t) dt` for a single mollifier, bump by bump.
pub fn kernel_piece(spec: &MollifierSpec, p: &KernelParams, x: &[f64], ctl: QuadControl) -> Result<KernelSample> {
    check_point(p, x)?;
    let piece = match spec.variant {
        Variant::Prime => Piece::KQ,
        Variant::Dyadic => Piece::KQs,
    };
    if p.big_n == 0 {
        return Ok(KernelSample { piece, x: x.to_vec(), value: Complex64::new(0.0, 0.0), quadrature_nodes: 0, est_error: 0.0 });
    }
    let tol = ctl.tol.unwrap_or_else(|| p.default_tolerance());
    let f = Integrand::new(p, x);
    let (value, nodes, est_error) = match spec.variant {
        Variant::Prime => {
            let omega = std::f64::consts::TAU * p.max_frequency() / spec.scale;
            let mut j = eta_rule_index_for(omega);
            let per_rule = |j: usize| ETA_RULE_SIZES[j] * spec.fractions.len();
            let mut value = prime_sum(spec, &f, j);
            let mut nodes = per_rule(j);
            let mut est = 0.0;
            if ctl.checked {
                loop {
                    if j + 1 == ETA_RULE_SIZES.len() {
                        return Err(Error::QuadratureNotConverged { tolerance: tol, estimate: est });
                    }
                    let finer = prime_sum(spec, &f, j + 1);
                    nodes += per_rule(j + 1);
                    est = (finer - value).norm();
                    value = finer;
                    j += 1;
                    if est <= tol {
                        break;
                    }
                }
            }
            (value, nodes, est)
        }
        Variant::Dyadic => dyadic_sum(spec, p, &f, tol)?,
    };
    Ok(KernelSample { piece, x: x.to_vec(), value, quadrature_nodes: nodes, est_error })
}

/// `K^minor(x) = ∫ P(t, x) e(−λt) ρ(t) dt`, integrated globally over the
/// circle with breakpoints at every bump joint.
pub fn kernel_minor(layout: &DyadicLayout, p: &KernelParams, x: &[f64], tol: Option<f64>) -> Result<KernelSample> {
    check_point(p, x)?;
    let tol = tol.unwrap_or_else(|| p.default_tolerance());
    let f = Integrand::new(p, x);
    let lam = p.lambda as f64;
    let g = |t: f64| {
        let w = layout.rho(t);
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            f.product(t) * e(-lam * t) * w
        }
    };
    let panel = (1.0 / p.max_frequency().max(1.0)).min(0.125);
    let r = adaptive(&g, &layout.breakpoints(), panel, tol)?;
    Ok(KernelSample { piece: Piece::Kminor, x: x.to_vec(), value: r.value, quadrature_nodes: r.evaluations, est_error: r.est_error })
}

/// `K₁^{Q,s} = K^{Q,s} − α_{Q,s} K^minor`.
pub fn kernel_k1(layout: &DyadicLayout, index: usize, p: &KernelParams, x: &[f64], tol: Option<f64>) -> Result<KernelSample> {
    let ctl = QuadControl { tol, checked: true };
    let kqs = kernel_piece(&layout.pieces[index], p, x, ctl)?;
    let minor = kernel_minor(layout, p, x, tol)?;
    let alpha = layout.alpha(index)?;
    Ok(KernelSample {
        piece: Piece::K1,
        x: x.to_vec(),
        value: kqs.value - minor.value * alpha,
        quadrature_nodes: kqs.quadrature_nodes + minor.quadrature_nodes,
        est_error: kqs.est_error + alpha.abs() * minor.est_error,
    })
}

/// Pieces whose Fourier coefficients have closed forms.
#[derive(Debug, Clone, Copy)]
pub enum FourierPiece<'a> {
    KMinusKQ(&'a MollifierSpec),
    KQs(&'a MollifierSpec),
    KMinor(&'a DyadicLayout),
    K1(&'a DyadicLayout, usize),
}

impl FourierPiece<'_> {
    /// Multiplier at `l = |k|² − λ`; the coefficient is this times `Π γ(k_i/N)`.
    pub fn multiplier(&self, l: i64) -> Result<f64> {
        let delta = if l == 0 { 1.0 } else { 0.0 };
        match *self {
            FourierPiece::KMinusKQ(spec) => Ok(delta - spec.transform(l)?),
            FourierPiece::KQs(spec) => spec.transform(l),
            FourierPiece::KMinor(layout) => layout.rho_transform(l),
            FourierPiece::K1(layout, i) => {
                Ok(layout.pieces[i].transform(l)? - layout.alpha(i)? * layout.rho_transform(l)?)
            }
        }
    }
}

fn gamma_product(weights: &[f64], k: &[i64]) -> f64 {
    k.iter()
        .map(|&ki| weights.get(ki.unsigned_abs() as usize).copied().unwrap_or(0.0))
        .product()
}

/// Closed-form Fourier coefficient at `k ∈ Z^n`.
pub fn fourier_coefficient(piece: FourierPiece, p: &KernelParams, k: &[i64]) -> Result<Complex64> {
    if k.len() != p.n {
        return Err(Error::InvalidParameter("frequency has the wrong dimension".into()));
    }
    let g = gamma_product(&gamma_weights(p.big_n), k);
    if g == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let l = k.iter().map(|&x| x * x).sum::<i64>() - p.lambda as i64;
    Ok(Complex64::new(piece.multiplier(l)? * g, 0.0))
}

/// `max |F(piece)(k)|` over the cutoff box `|k_i| < 2N`, with a maximiser.
pub fn fourier_sup(piece: FourierPiece, p: &KernelParams) -> Result<(f64, Vec<i64>)> {
    let w = gamma_weights(p.big_n);
    let side = w.iter().take_while(|&&v| v > 0.0).count();
    if side == 0 {
        return Ok((0.0, vec![0; p.n]));
    }
    let lam = p.lambda as i64;
    let l_max = (p.n * (side - 1) * (side - 1)) as i64 - lam;
    let table: Vec<f64> = crate::exec::map_indexed((l_max + lam + 1) as usize, |i| {
        piece.multiplier(i as i64 - lam).map(f64::abs)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut best = (0.0f64, vec![0i64; p.n]);
    let mut k = vec![0usize; p.n];
    loop {
        let norm: usize = k.iter().map(|&v| v * v).sum();
        let g: f64 = k.iter().map(|&v| w[v]).product();
        let v = table[norm] * g;
        if v > best.0 {
            best = (v, k.iter().map(|&v| v as i64).collect());
        }
        let mut j = 0;
        loop {
            if j == p.n {
                return Ok(best);
            }
            k[j] += 1;
            if k[j] < side {
                break;
            }
            k[j] = 0;
            j += 1;
        }
    }
}

/// Reference size of a piece's sup norm, used for ratio reports.
pub fn sup_norm_reference(piece: Piece, p: &KernelParams, q_param: u64, s: u32) -> f64 {
    let n = p.n as f64;
    let nf = p.big_n as f64;
    let q = q_param as f64;
    match piece {
        Piece::KQ => q.powf((n - 1.0) / 2.0),
        Piece::KQs | Piece::K1 => (nf * 2f64.powi(s as i32)).powf(n / 2.0 - 1.0) * q.powf(-(n - 3.0) / 2.0),
        Piece::Kminor => nf.powf((n - 1.0) / 2.0),
        Piece::K => nf.powf(n - 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::enumerate_shell;

    #[test]
    fn direct_examples() {
        let s = enumerate_shell(2, 25).unwrap();
        assert_eq!(s.len(), 12);
        assert!((kernel_direct(&s, &[0.0, 0.0]) - Complex64::new(12.0, 0.0)).norm() < 1e-12);
        // At x = (1/4, 0) each point contributes i^{ξ₁}: ξ₁ = ±5 gives ±i,
        // ±4 gives 1 (four points), ±3 gives ∓i, 0 gives 1 (two points).
        assert!((kernel_direct(&s, &[0.25, 0.0]) - Complex64::new(6.0, 0.0)).norm() < 1e-12);
        let empty = enumerate_shell(3, 7).unwrap();
        assert_eq!(kernel_direct(&empty, &[0.1, 0.2, 0.3]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn integral_examples() {
        let p = KernelParams::new(1, 4, 3).unwrap();
        let v = kernel_integral(&p, &[0.0], integral_node_threshold(&p)).unwrap().value;
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-9);
        let p = KernelParams::new(3, 11, 4).unwrap();
        let v = kernel_integral(&p, &[0.0; 3], integral_node_threshold(&p)).unwrap().value;
        assert!((v.re - 24.0).abs() < 1e-8);
        assert!(matches!(kernel_integral(&p, &[0.0; 3], 10), Err(Error::InsufficientNodes { .. })));
    }

    #[test]
    fn degenerate_cutoff_gives_zero() {
        let p = KernelParams::new(2, 0, 0).unwrap();
        let spec = MollifierSpec::prime(13, 12).unwrap();
        let v = kernel_piece(&spec, &p, &[0.3, 0.1], QuadControl::default()).unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mean_one_mollifier_kills_shell_frequencies() {
        let spec = MollifierSpec::prime(13, 12).unwrap();
        let p = KernelParams::new(3, 125, 12).unwrap();
        let c = fourier_coefficient(FourierPiece::KMinusKQ(&spec), &p, &[10, 5, 0]).unwrap();
        assert!(c.norm() < 1e-12);
    }
}
