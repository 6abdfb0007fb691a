//! Batched evaluation of `|F(x)|` for several coefficient vectors over a
//! common set of sample points.

use crate::exec;
use crate::numeric::phase_tables;
use crate::rng;
use crate::sphere::{isqrt, SphereShell};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// How sample points are drawn on `T^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Sampler {
    Uniform,
    /// Equal mixture of the uniform law and uniform boxes of the given
    /// half-width around the points of `{0, 1/2}^n`. Samples carry the weight
    /// `1/density`, so weighted averages stay unbiased.
    Peaked { half_width: f64 },
}

impl Sampler {
    /// Mixture suited to kernels of a shell with parameter `N`.
    pub fn peaked_for(big_n: u64) -> Self {
        Sampler::Peaked { half_width: (2.0 / big_n.max(1) as f64).min(0.25) }
    }

    /// Point and importance weight for sample `index`.
    pub fn draw(&self, seed: u64, index: u64, n: usize) -> (Vec<f64>, f64) {
        let mut r = rng::stream(seed, index);
        match *self {
            Sampler::Uniform => ((0..n).map(|_| r.gen::<f64>()).collect(), 1.0),
            Sampler::Peaked { half_width: h } => {
                let x: Vec<f64> = if r.gen::<f64>() < 0.5 {
                    (0..n).map(|_| r.gen::<f64>()).collect()
                } else {
                    (0..n)
                        .map(|_| {
                            let c = if r.gen::<bool>() { 0.5 } else { 0.0 };
                            let v = c + h * (2.0 * r.gen::<f64>() - 1.0);
                            v - v.floor()
                        })
                        .collect()
                };
                let inside = x.iter().all(|&v| {
                    let d0 = v.min(1.0 - v);
                    let d1 = (v - 0.5).abs();
                    d0.min(d1) <= h
                });
                let box_density = 1.0 / (2f64.powi(n as i32) * (2.0 * h).powi(n as i32));
                let density = 0.5 + if inside { 0.5 * box_density } else { 0.0 };
                (x, 1.0 / density)
            }
        }
    }
}

/// `|F_d(x_i)|` for `m` samples and `d` coefficient vectors, with weights.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub m: usize,
    pub d: usize,
    /// Row-major `m × d`.
    pub abs: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SampleSet {
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.abs[i * self.d + j]).collect()
    }

    /// Weighted mean of `g(|F_j|)` with its standard error.
    pub fn mean_of<G: Fn(f64) -> f64>(&self, j: usize, g: G) -> (f64, f64) {
        let ys: Vec<f64> = (0..self.m).map(|i| self.weights[i] * g(self.abs[i * self.d + j])).collect();
        mean_and_se(&ys)
    }
}

pub fn mean_and_se(ys: &[f64]) -> (f64, f64) {
    let m = ys.len() as f64;
    let mean = exec::pairwise_sum(ys) / m;
    let dev: Vec<f64> = ys.iter().map(|y| (y - mean) * (y - mean)).collect();
    let var = if ys.len() > 1 { exec::pairwise_sum(&dev) / (m - 1.0) } else { 0.0 };
    (mean, (var / m).sqrt())
}

/// Coefficients split into real and imaginary planes.
struct Planes {
    re: Vec<f64>,
    im: Vec<f64>,
    real: bool,
}

const CHUNK: usize = 64;

/// Dot product with four fixed accumulation lanes (vectorisable, and the
/// association order does not depend on anything but the length).
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Evaluates every coefficient vector at `m` sample points.
pub fn evaluate(shell: &SphereShell, coeffs: &[&[Complex64]], sampler: &Sampler, m: usize, seed: u64) -> SampleSet {
    let n = shell.dim();
    let len = shell.len();
    let d = coeffs.len();
    let planes: Vec<Planes> = coeffs
        .iter()
        .map(|a| Planes {
            re: a.iter().map(|z| z.re).collect(),
            im: a.iter().map(|z| z.im).collect(),
            real: a.iter().all(|z| z.im == 0.0),
        })
        .collect();
    let r = isqrt(shell.lambda()) as i64;
    let offsets: Vec<usize> = shell.coords().iter().map(|&c| (c as i64 + r) as usize).collect();
    let chunks = exec::map_chunks(m, CHUNK, |range| {
        let mut vre = vec![0.0; len];
        let mut vim = vec![0.0; len];
        let mut out = Vec::with_capacity(range.len() * (d + 1));
        for i in range {
            let (x, w) = sampler.draw(seed, i as u64, n);
            let tables = phase_tables(&x, r);
            for p in 0..len {
                let row = &offsets[p * n..(p + 1) * n];
                let mut z = tables[0][row[0]];
                for j in 1..n {
                    z *= tables[j][row[j]];
                }
                vre[p] = z.re;
                vim[p] = z.im;
            }
            out.push(w);
            for pl in &planes {
                let (mut fr, mut fi) = (dot(&pl.re, &vre), dot(&pl.re, &vim));
                if !pl.real {
                    fr -= dot(&pl.im, &vim);
                    fi += dot(&pl.im, &vre);
                }
                out.push(fr.hypot(fi));
            }
        }
        out
    });
    let mut abs = Vec::with_capacity(m * d);
    let mut weights = Vec::with_capacity(m);
    for c in chunks {
        for row in c.chunks_exact(d + 1) {
            weights.push(row[0]);
            abs.extend_from_slice(&row[1..]);
        }
    }
    SampleSet { m, d, abs, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peaked_weights_are_unbiased_for_constants() {
        let s = Sampler::peaked_for(16);
        let ws: Vec<f64> = (0..200_000).map(|i| s.draw(3, i, 2).1).collect();
        let (mean, se) = mean_and_se(&ws);
        assert!((mean - 1.0).abs() < 4.0 * se + 1e-3, "{mean} ± {se}");
    }
}
