//! `shell`, `sums` and `weyl`.

use crate::{CliError, CliResult, Context, Outcome, PairArgs, ShellArgs, SigmaArgs, SumsCmd, WeylCmd};
use num_complex::Complex64;
use rand::Rng;
use restlab_core::arith::{euler_phi, gcd, primes_in};
use restlab_core::bump::BumpFunction;
use restlab_core::exp_sums::*;
use restlab_core::report::{num_row, ExperimentReport};
use restlab_core::rng;
use restlab_core::sphere::{enumerate_shell_with_budget, shell_count};
use restlab_core::weyl::*;
use serde_json::json;

const DEFAULT_SHELL_BUDGET: u64 = 2_000_000_000;

fn fmt_c(z: Complex64) -> String {
    format!("{:.12} {:+.12}i", z.re, z.im)
}

pub fn shell(ctx: &Context, a: ShellArgs) -> CliResult<Outcome> {
    let params = json!({"n": a.n, "lambda": a.lambda});
    if a.count {
        let c = shell_count(a.n, a.lambda)?;
        let mut rep = ExperimentReport::new("shell_count", params);
        rep.set("count", c);
        return ctx.emit(&rep.with_table(&["n", "lambda", "count"], vec![num_row(&[a.n as f64, a.lambda as f64, c as f64])]), vec![c.to_string()]);
    }
    let s = enumerate_shell_with_budget(a.n, a.lambda, a.budget.unwrap_or(DEFAULT_SHELL_BUDGET))?;
    let summary = vec![format!("|F| = {} (n = {}, lambda = {}, N = {})", s.len(), a.n, a.lambda, s.big_n())];
    if a.binary {
        let path = ctx.path_for("shell").with_extension("bin");
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        s.write_binary(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
        return Ok(Outcome { summary, verdict: None, path: Some(path) });
    }
    let mut rep = ExperimentReport::new("shell", params);
    rep.set("N", s.big_n());
    rep.set("count", s.len());
    let pts: Vec<Vec<i16>> = s.points().map(|p| p.to_vec()).collect();
    let rows = pts.iter().map(|p| p.iter().map(|v| v.to_string()).collect()).collect();
    rep.set("points", &pts);
    let cols: Vec<String> = (0..a.n).map(|i| format!("x{i}")).collect();
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    ctx.emit(&rep.with_table(&cols, rows), summary)
}

pub fn sums(ctx: &Context, c: SumsCmd) -> CliResult<Outcome> {
    match c {
        SumsCmd::Gauss { q, q_max } => gauss(ctx, q, q_max),
        SumsCmd::Quad { a, m, q } => {
            let d = quad_sum(a, m, q)?.value;
            let mut rep = ExperimentReport::new("quad_sum", json!({"a": a, "m": m, "q": q}));
            rep.set("direct", [d.re, d.im]);
            let mut summary = vec![format!("S({a}, {m}, {q}) = {}", fmt_c(d))];
            if q % 2 == 1 && gcd(a.rem_euclid(q as i64) as u64, q) == 1 {
                let cf = quad_sum_closed(a, m, q)?.value;
                rep.set("closed_form", [cf.re, cf.im]);
                rep.set("difference", (d - cf).norm());
                rep.verdict = Some((d - cf).norm() < 1e-10);
                summary.push(format!("closed form  = {}  (diff {:.2e})", fmt_c(cf), (d - cf).norm()));
            }
            ctx.emit(&rep, summary)
        }
        SumsCmd::Kloosterman(p) => pair(ctx, p, SweepKind::Kloosterman),
        SumsCmd::Salie(p) => pair(ctx, p, SweepKind::Salie),
        SumsCmd::Sigma(s) => sigma(ctx, s),
        SumsCmd::Selberg { m, n, x_max } => {
            let partial = selberg_partial(m, n, x_max)?;
            let mut rows = Vec::new();
            let mut triangle = 0.0;
            for (i, v) in partial.iter().enumerate() {
                let q = i as u64 + 2;
                triangle += euler_phi(q) as f64 / q as f64;
                rows.push(num_row(&[q as f64, v.re, v.im, v.norm(), triangle]));
            }
            let last = *partial.last().unwrap();
            let mut rep = ExperimentReport::new("selberg", json!({"m": m, "n": n, "x_max": x_max}));
            rep.set("final", [last.re, last.im]);
            rep.set("final_abs", last.norm());
            rep.set("triangle_bound", triangle);
            rep.verdict = Some(last.norm() <= triangle);
            let summary = vec![format!("sum_(q<={x_max}) K({m},{n},q)/q = {}  |.| = {:.6}  (triangle bound {:.3})", fmt_c(last), last.norm(), triangle)];
            ctx.emit(&rep.with_table(&["X", "re", "im", "abs", "triangle_bound"], rows), summary)
        }
    }
}

fn gauss(ctx: &Context, q: Option<u64>, q_max: Option<u64>) -> CliResult<Outcome> {
    let qs: Vec<u64> = match (q, q_max) {
        (Some(q), None) => vec![q],
        (None, Some(m)) => (1..=m).collect(),
        _ => return Err(CliError::Invalid("give exactly one of --q and --q-max".into())),
    };
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &q in &qs {
        let g = gauss_sum(q)?.value;
        let expect = if q % 2 == 1 { (q as f64).powf(-0.5) } else { f64::NAN };
        if q % 2 == 1 {
            worst = worst.max((g.norm() - expect).abs());
        }
        rows.push(num_row(&[q as f64, g.re, g.im, g.norm(), expect]));
    }
    let mut rep = ExperimentReport::new("gauss", json!({"q": q, "q_max": q_max}));
    rep.set("max_odd_modulus_error", worst);
    rep.verdict = Some(worst <= 1e-10);
    let summary = if qs.len() == 1 {
        let g = gauss_sum(qs[0])?.value;
        vec![format!("G({}) = {}  |G| = {:.12}", qs[0], fmt_c(g), g.norm())]
    } else {
        vec![format!("{} moduli; max | |G(q)| - q^-1/2 | over odd q = {:.2e}", qs.len(), worst)]
    };
    ctx.emit(&rep.with_table(&["q", "re", "im", "abs", "expected_abs"], rows), summary)
}

fn pair(ctx: &Context, p: PairArgs, kind: SweepKind) -> CliResult<Outcome> {
    let name = match kind {
        SweepKind::Kloosterman => "kloosterman",
        SweepKind::Salie => "salie",
    };
    if let Some(max) = p.sweep_max {
        let primes = primes_in(2, max + 1)?;
        let rows = bound_sweep(kind, &primes)?;
        let worst = rows.iter().map(|r| r.value_re.hypot(r.value_im) - r.bound).fold(f64::NEG_INFINITY, f64::max);
        let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let mut rep = ExperimentReport::new(&format!("{name}_sweep"), json!({"sweep_max": max, "check_explicit": p.check_explicit}));
        rep.set("pairs", rows.len());
        rep.set("max_ratio", max_ratio);
        rep.set("max_excess", worst);
        let mut ok = worst <= 1e-6;
        let mut summary = vec![format!("{} pairs over primes <= {max}; max |sum|/(2 sqrt q) = {:.6}", rows.len(), max_ratio)];
        if p.check_explicit && kind == SweepKind::Salie {
            let mut max_diff = 0.0f64;
            let mut compared = 0usize;
            for r in &rows {
                if let Ok(e) = salie_explicit(r.a as i64, r.b as i64, r.q) {
                    max_diff = max_diff.max((e.value - Complex64::new(r.value_re, r.value_im)).norm());
                    compared += 1;
                }
            }
            rep.set("explicit_compared", compared);
            rep.set("explicit_max_difference", max_diff);
            ok &= max_diff <= 1e-8;
            summary.push(format!("closed form vs direct on {compared} residue pairs: max diff {max_diff:.2e}"));
        }
        rep.verdict = Some(ok);
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| num_row(&[r.q as f64, r.a as f64, r.b as f64, r.value_re, r.value_im, r.bound, r.ratio]))
            .collect();
        return ctx.emit(&rep.with_table(&["q", "a", "b", "re", "im", "bound", "ratio"], table), summary);
    }
    let (Some(a), Some(b), Some(q)) = (p.a, p.b, p.q) else {
        return Err(CliError::Invalid("give --a, --b and --q, or --sweep-max".into()));
    };
    let direct = match kind {
        SweepKind::Kloosterman => kloosterman(a, b, q)?.value,
        SweepKind::Salie => salie_direct(a, b, q)?.value,
    };
    let mut rep = ExperimentReport::new(name, json!({"a": a, "b": b, "q": q}));
    rep.set("direct", [direct.re, direct.im]);
    let mut summary = vec![format!("direct   = {}", fmt_c(direct))];
    if p.check_explicit && kind == SweepKind::Salie {
        match salie_explicit(a, b, q) {
            Ok(e) => {
                let diff = (e.value - direct).norm();
                rep.set("explicit", [e.value.re, e.value.im]);
                rep.set("difference", diff);
                rep.verdict = Some(diff < 1e-10);
                summary.push(format!("explicit = {}", fmt_c(e.value)));
                summary.push(format!("diff     = {diff:.3e}"));
            }
            Err(e) => {
                rep.set("explicit_error", e.to_string());
                summary.push(format!("explicit form unavailable: {e}"));
            }
        }
    }
    ctx.emit(&rep, summary)
}

fn sigma(ctx: &Context, a: SigmaArgs) -> CliResult<Outcome> {
    if let Some(q_max) = a.q_max {
        let seed = ctx.seed("sigma bound sweep")?;
        let primes = primes_in(2, q_max + 1)?;
        let mut rows = Vec::new();
        let mut max_ratio = 0.0f64;
        for &n in &a.dims {
            for &q in &primes {
                for d in 0..a.draws {
                    let mut r = rng::stream(seed, ((n as u64) << 40) | (q << 16) | d as u64);
                    let m: Vec<i64> = (0..n).map(|_| r.gen_range(0..q as i64)).collect();
                    let lambda: i64 = r.gen_range(1..=(q * q) as i64);
                    let sp = SingularParams::new(m, lambda, q)?;
                    let v = if q == 2 { singular_sigma(&sp)? } else { singular_sigma_reduced(&sp)? }.value.norm();
                    let bound = singular_sigma_bound(n, lambda, q, a.constant);
                    max_ratio = max_ratio.max(v / bound);
                    rows.push(num_row(&[n as f64, q as f64, lambda as f64, v, bound, v / bound]));
                }
            }
        }
        let mut rep = ExperimentReport::new("sigma_bound", json!({"dims": a.dims, "q_max": q_max, "draws": a.draws, "constant": a.constant, "seed": seed}));
        rep.set("cases", rows.len());
        rep.set("max_ratio", max_ratio);
        rep.verdict = Some(max_ratio <= 1.0);
        let summary = vec![format!("{} cases; max |Sigma(q)| / bound = {max_ratio:.4}", rows.len())];
        return ctx.emit(&rep.with_table(&["n", "q", "lambda", "abs_sigma", "bound", "ratio"], rows), summary);
    }
    let (Some(lambda), Some(s)) = (a.lambda, a.s) else {
        return Err(CliError::Invalid("give --m, --lambda and --s, or --q-max".into()));
    };
    let p = SingularParams::new(a.m.clone(), lambda, s)?;
    let d = singular_sigma(&p)?.value;
    let mut rep = ExperimentReport::new("sigma", json!({"m": a.m, "lambda": lambda, "s": s}));
    rep.set("direct", [d.re, d.im]);
    let mut summary = vec![format!("Sigma({s}) = {}", fmt_c(d))];
    if a.check_reduced {
        let r = singular_sigma_reduced(&p)?.value;
        let diff = (r - d).norm();
        rep.set("reduced", [r.re, r.im]);
        rep.set("difference", diff);
        rep.verdict = Some(diff < 1e-8 * (1.0 + d.norm()));
        summary.push(format!("reduced   = {}  (diff {diff:.2e})", fmt_c(r)));
    }
    ctx.emit(&rep, summary)
}

pub fn weyl(ctx: &Context, c: WeylCmd) -> CliResult<Outcome> {
    let gamma = BumpFunction::GAMMA;
    match c {
        WeylCmd::PoissonCheck { n, a, q, phi, x, tolerance } => {
            let cases = match (a, q) {
                (Some(a), Some(q)) => vec![(MajorArcPoint::new(a, q, phi)?, x)],
                (None, None) if n == 100 => poisson_regression_suite(),
                (None, None) => return Err(CliError::Invalid("the regression suite is fixed at --n 100; give --a and --q for other N".into())),
                _ => return Err(CliError::Invalid("give both --a and --q".into())),
            };
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            for (p, x) in &cases {
                let d = weyl_direct_arc(p, *x, n, gamma);
                let v = weyl_poisson(p, *x, n, gamma, None)?;
                let rel = (v.value - d).norm() / d.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                rows.push(num_row(&[p.a as f64, p.q as f64, p.phi, *x, d.re, d.im, v.value.re, v.value.im, rel, (v.m_hi - v.m_lo + 1) as f64]));
            }
            let mut rep = ExperimentReport::new("poisson_check", json!({"N": n, "cases": cases.len(), "tolerance": tolerance}));
            rep.set("max_relative_error", worst);
            rep.verdict = Some(worst <= tolerance);
            let summary = vec![format!("{} cases at N = {n}; max relative error {worst:.3e} (tolerance {tolerance:.0e})", cases.len())];
            ctx.emit(
                &rep.with_table(&["a", "q", "phi", "x", "direct_re", "direct_im", "poisson_re", "poisson_im", "rel_error", "terms"], rows),
                summary,
            )
        }
        WeylCmd::Envelope { n, samples } => {
            let seed = ctx.seed("weyl envelope")?;
            let rep = weyl_envelope_check(n, samples, seed)?;
            let summary = vec![format!(
                "max |G| / envelope = {:.4}, median {:.4}, constant (max / N^0.2) {:.4}",
                rep.get_f64("max_ratio").unwrap_or(f64::NAN),
                rep.get_f64("median_ratio").unwrap_or(f64::NAN),
                rep.get_f64("constant").unwrap_or(f64::NAN)
            )];
            ctx.emit(&rep, summary)
        }
    }
}
