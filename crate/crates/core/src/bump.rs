//! Compactly supported smooth bumps used as cutoffs and mollifiers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// Plateau 1 on `[−1, 1]`, smooth step down to 0 at `|y| = 2`.
    Gamma,
    /// `exp(1 − 1/(1 − y²))` on `(−1, 1)`, peak 1 at the origin.
    Eta,
    /// Plateau 1 on `1/4 ≤ |t| ≤ 1/2`, supported in `1/8 ≤ |t| ≤ 1`.
    Annular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub kind: BumpKind,
}

impl BumpFunction {
    pub const GAMMA: BumpFunction = BumpFunction { kind: BumpKind::Gamma };
    pub const ETA: BumpFunction = BumpFunction { kind: BumpKind::Eta };
    pub const ANNULAR: BumpFunction = BumpFunction { kind: BumpKind::Annular };

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        match self.kind {
            BumpKind::Gamma => gamma(y),
            BumpKind::Eta => crate::quadrature::eta_weight(y),
            BumpKind::Annular => annular(y),
        }
    }

    /// Closed interval outside of which the bump vanishes (for `Annular` the
    /// outer radius of the symmetric annulus).
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            BumpKind::Gamma => 2.0,
            BumpKind::Eta | BumpKind::Annular => 1.0,
        }
    }
}

#[inline]
fn psi(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth monotone step from 0 at `u ≤ 0` to 1 at `u ≥ 1`.
#[inline]
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = psi(u);
        a / (a + psi(1.0 - u))
    }
}

#[inline]
pub fn gamma(y: f64) -> f64 {
    smooth_step(2.0 - y.abs())
}

#[inline]
pub fn annular(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.125 || a >= 1.0 {
        0.0
    } else if a < 0.25 {
        smooth_step(8.0 * (a - 0.125))
    } else if a <= 0.5 {
        1.0
    } else {
        smooth_step(2.0 * (1.0 - a))
    }
}

/// `γ(k/N)` for `k = 0..2N`; the cutoff is even so negative `k` reuse these.
pub fn gamma_weights(big_n: u64) -> Vec<f64> {
    if big_n == 0 {
        return vec![0.0];
    }
    (0..=2 * big_n).map(|k| gamma(k as f64 / big_n as f64)).collect()
}

/// `η̂₇(ξ) = ∫ η₇(u) e(ξu) du`, real because `η₇` is even.
pub fn annular_transform(xi: f64) -> crate::Result<f64> {
    let omega = std::f64::consts::TAU * xi;
    let f = |u: f64| num_complex::Complex64::new(annular(u) * (omega * u).cos(), 0.0);
    let panel = if xi == 0.0 { 0.125 } else { (0.5 / xi.abs()).min(0.125) };
    let half = crate::quadrature::adaptive(&f, &[0.125, 0.25, 0.5, 1.0], panel, 1e-14)?;
    Ok(2.0 * half.value.re)
}
