//! A quick pass over the cross-method identities, each at a small size.

use crate::{CliResult, Context, Outcome};
use num_complex::Complex64;
use restlab_core::arith::primes_in;
use restlab_core::bump::BumpFunction;
use restlab_core::exp_sums::*;
use restlab_core::kernel::*;
use restlab_core::report::ExperimentReport;
use restlab_core::restriction::{lp_norm_grid, make_coefficients, CoeffKind};
use restlab_core::rng::torus_point;
use restlab_core::sphere::{enumerate_shell, shell_count, three_square_obstructed};
use restlab_core::weyl::{poisson_regression_suite, weyl_direct_arc, weyl_poisson};
use serde_json::json;

type Check = (&'static str, fn() -> restlab_core::Result<(bool, String)>);

fn gauss() -> restlab_core::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for q in (1..=199u64).step_by(2) {
        worst = worst.max((gauss_sum(q)?.value.norm() - (q as f64).powf(-0.5)).abs());
    }
    Ok((worst <= 1e-10, format!("max error {worst:.1e}")))
}

fn quad_closed_form() -> restlab_core::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for q in [3u64, 9, 15, 21, 35] {
        for a in 1..q as i64 {
            if restlab_core::arith::gcd(a as u64, q) != 1 {
                continue;
            }
            for m in 0..q as i64 {
                worst = worst.max((quad_sum(a, m, q)?.value - quad_sum_closed(a, m, q)?.value).norm());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max difference {worst:.1e}")))
}

fn salie() -> restlab_core::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for &q in &primes_in(3, 40)? {
        for a in 1..q as i64 {
            for b in 1..q as i64 {
                if let Ok(e) = salie_explicit(a, b, q) {
                    worst = worst.max((e.value - salie_direct(a, b, q)?.value).norm());
                }
            }
        }
    }
    Ok((worst <= 1e-8, format!("max difference {worst:.1e}")))
}

fn weil() -> restlab_core::Result<(bool, String)> {
    let primes = primes_in(2, 60)?;
    let mut rows = bound_sweep(SweepKind::Kloosterman, &primes)?;
    rows.extend(bound_sweep(SweepKind::Salie, &primes)?);
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok((rows.iter().all(|r| r.value_re.hypot(r.value_im) <= r.bound + 1e-6), format!("max ratio {worst:.4}")))
}

fn sigma() -> restlab_core::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (m, lambda, s) in [(vec![1, 2, 3], 14, 7u64), (vec![0, 1, 1, 2], 6, 9), (vec![5, -2, 3, 1, 1], 40, 15)] {
        let p = SingularParams::new(m, lambda, s)?;
        worst = worst.max((singular_sigma(&p)?.value - singular_sigma_reduced(&p)?.value).norm());
    }
    Ok((worst <= 1e-8, format!("max difference {worst:.1e}")))
}

fn shells() -> restlab_core::Result<(bool, String)> {
    let mut ok = shell_count(3, 7)? == 0 && enumerate_shell(4, 4)?.len() == 24;
    for l in 1..=500 {
        ok &= (shell_count(3, l)? == 0) == three_square_obstructed(l);
    }
    Ok((ok, "three-square obstruction and |F_{4,4}| = 24".into()))
}

fn poisson() -> restlab_core::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (p, x) in poisson_regression_suite().into_iter().take(10) {
        let d = weyl_direct_arc(&p, x, 100, BumpFunction::GAMMA);
        let v = weyl_poisson(&p, x, 100, BumpFunction::GAMMA, None)?.value;
        worst = worst.max((v - d).norm() / d.norm());
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.1e}")))
}

fn kernel_identity() -> restlab_core::Result<(bool, String)> {
    let s = enumerate_shell(3, 27)?;
    let p = KernelParams::for_shell(&s);
    let mut worst = 0.0f64;
    for i in 0..5 {
        let x = torus_point(1, i, 3);
        let d = kernel_direct(&s, &x);
        let v = kernel_integral(&p, &x, integral_node_threshold(&p))?.value;
        worst = worst.max((v - d).norm() / d.norm().max(1.0));
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.1e}")))
}

fn partition_of_unity() -> restlab_core::Result<(bool, String)> {
    let layout = DyadicLayout::new(12, 8)?;
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let t = torus_point(2, i, 1)[0];
        let total = layout.rho(t) + layout.pieces.iter().map(|m| m.eval(t)).sum::<f64>();
        worst = worst.max((total - 1.0).abs());
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.1e}")))
}

fn parseval() -> restlab_core::Result<(bool, String)> {
    let s = enumerate_shell(2, 65)?;
    let mut worst = 0.0f64;
    for seed in 0..3 {
        let c = make_coefficients(&s, CoeffKind::RandomGaussian, seed)?;
        worst = worst.max((lp_norm_grid(&s, &c, 2, 4 * s.big_n() + 1)? - 1.0).abs());
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.1e}")))
}

fn decomposition() -> restlab_core::Result<(bool, String)> {
    let s = enumerate_shell(2, 50)?;
    let p = KernelParams::for_shell(&s);
    let layout = DyadicLayout::new(p.big_n, 4)?;
    let mut worst = 0.0f64;
    for i in 0..3 {
        let x = torus_point(3, i, 2);
        let mut total = kernel_minor(&layout, &p, &x, None)?.value;
        for m in &layout.pieces {
            total += kernel_piece(m, &p, &x, QuadControl::default())?.value;
        }
        let d: Complex64 = kernel_direct(&s, &x);
        worst = worst.max((total - d).norm() / d.norm().max(1.0));
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.1e}")))
}

const CHECKS: &[Check] = &[
    ("gauss_modulus", gauss),
    ("quadratic_closed_form", quad_closed_form),
    ("salie_closed_form", salie),
    ("weil_bounds", weil),
    ("singular_series_reduction", sigma),
    ("shell_identities", shells),
    ("poisson_expansion", poisson),
    ("kernel_integral_identity", kernel_identity),
    ("partition_of_unity", partition_of_unity),
    ("annular_decomposition", decomposition),
    ("parseval", parseval),
];

pub fn run(ctx: &Context) -> CliResult<Outcome> {
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut summary = Vec::new();
    let mut all = true;
    for (name, f) in CHECKS {
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        summary.push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
        rows.push(vec![name.to_string(), ok.to_string(), detail.clone()]);
        results.push(json!({"check": name, "passed": ok, "detail": detail}));
    }
    let mut rep = ExperimentReport::new("selftest", json!({}));
    rep.set("checks", results);
    rep.verdict = Some(all);
    ctx.emit(&rep.with_table(&["check", "passed", "detail"], rows), summary)
}
