//! Lower bounds for sup norms by random search plus coordinate ascent.

use crate::exec;
use crate::rng::torus_point;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupNormConfig {
    pub samples: usize,
    pub starts: usize,
    pub iterations: usize,
    pub sweeps: usize,
    pub seed: u64,
}

impl SupNormConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        SupNormConfig { samples, starts: 10, iterations: 20, sweeps: 2, seed }
    }
}

/// The largest value found and where; a certified lower bound on the sup.
#[derive(Debug, Clone, Serialize)]
pub struct SupNormEstimate {
    pub value: f64,
    pub point: Vec<f64>,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximises `f ≥ 0` over `T^n`. The origin is always sampled; the ascent
/// brackets each coordinate by `±1/(4N)`.
pub fn sup_norm_estimate<F>(f: F, n: usize, big_n: u64, cfg: &SupNormConfig) -> SupNormEstimate
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let points: Vec<Vec<f64>> = (0..cfg.samples.max(1))
        .map(|i| if i == 0 { vec![0.0; n] } else { torus_point(cfg.seed, i as u64, n) })
        .collect();
    let values = exec::map_indexed(points.len(), |i| f(&points[i]));
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let half = 1.0 / (4.0 * big_n.max(1) as f64);
    let climbs = exec::map_indexed(cfg.starts.min(order.len()), |s| {
        let mut x = points[order[s]].clone();
        let mut best = values[order[s]];
        let mut evals = 0;
        for _ in 0..cfg.sweeps {
            for j in 0..n {
                let centre = x[j];
                let mut probe = x.clone();
                let mut g = |v: f64| {
                    probe[j] = v;
                    evals += 1;
                    f(&probe)
                };
                let (mut a, mut b) = (centre - half, centre + half);
                let mut c = b - INV_PHI * (b - a);
                let mut d = a + INV_PHI * (b - a);
                let (mut fc, mut fd) = (g(c), g(d));
                for _ in 0..cfg.iterations {
                    if fc > fd {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - INV_PHI * (b - a);
                        fc = g(c);
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + INV_PHI * (b - a);
                        fd = g(d);
                    }
                }
                let (cand, fv) = if fc > fd { (c, fc) } else { (d, fd) };
                if fv > best {
                    best = fv;
                    x[j] = cand - cand.floor();
                }
            }
        }
        (best, x, evals)
    });
    let mut out = SupNormEstimate { value: values[order[0]], point: points[order[0]].clone(), evaluations: points.len() };
    for (best, x, evals) in climbs {
        out.evaluations += evals;
        if best > out.value {
            out.value = best;
            out.point = x;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_an_offset_peak() {
        let f = |x: &[f64]| {
            let d: f64 = x.iter().map(|&v| {
                let t = v - 0.37;
                let t = t - t.round();
                t * t
            }).sum();
            (-200.0 * d).exp()
        };
        let est = sup_norm_estimate(f, 2, 4, &SupNormConfig::new(1000, 3));
        assert!(est.value > 0.999, "{}", est.value);
    }

    #[test]
    fn origin_is_always_a_start() {
        let f = |x: &[f64]| if x.iter().all(|&v| v == 0.0) { 5.0 } else { 1.0 };
        assert_eq!(sup_norm_estimate(f, 3, 8, &SupNormConfig::new(1000, 1)).value, 5.0);
    }
}
