//! `kernel` subcommands.

use crate::{CliError, CliResult, Context, KernelCmd, LevelChainArgs, Outcome, PieceSel, PointSel, ShellSel};
use num_complex::Complex64;
use restlab_core::kernel::*;
use restlab_core::report::{num_row, ExperimentReport};
use restlab_core::restriction::{levelset_chain_check, make_coefficients_tagged, ChainBounds, CoeffKind};
use restlab_core::rng::torus_point;
use restlab_core::sphere::{enumerate_shell, SphereShell};
use serde_json::json;

fn load_shell(s: &ShellSel) -> CliResult<SphereShell> {
    Ok(enumerate_shell(s.n, s.lambda)?)
}

fn points(ctx: &Context, at: &PointSel, n: usize) -> CliResult<Vec<Vec<f64>>> {
    match at.points {
        Some(k) => {
            let seed = ctx.seed("random kernel points")?;
            Ok((0..k as u64).map(|i| torus_point(seed, i, n)).collect())
        }
        None if at.x.len() == n => Ok(vec![at.x.clone()]),
        None => Err(CliError::Invalid(format!("--x needs {n} coordinates (or use --points)"))),
    }
}

fn x_columns(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn table(n: usize, extra: &[&str]) -> Vec<String> {
    let mut c = x_columns(n);
    c.extend(extra.iter().map(|s| s.to_string()));
    c
}

fn emit_table(ctx: &Context, rep: ExperimentReport, cols: Vec<String>, rows: Vec<Vec<String>>, summary: Vec<String>) -> CliResult<Outcome> {
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    ctx.emit(&rep.with_table(&cols, rows), summary)
}

/// A point evaluator for the selected piece.
enum Evaluator {
    Direct,
    Major(MollifierSpec),
    Minor(DyadicLayout),
    K1(DyadicLayout, usize),
    Remainder(MollifierSpec),
}

impl Evaluator {
    fn new(sel: &PieceSel, big_n: u64) -> CliResult<(Self, Piece)> {
        let q = sel.q.unwrap_or(big_n);
        Ok(match sel.piece.as_str() {
            "k" => (Evaluator::Direct, Piece::K),
            "kq" => (Evaluator::Major(MollifierSpec::prime(q, big_n)?), Piece::KQ),
            "kqs" => {
                let s = sel.s.ok_or_else(|| CliError::Invalid("kqs needs --s".into()))?;
                let q = sel.q.ok_or_else(|| CliError::Invalid("kqs needs --q".into()))?;
                (Evaluator::Major(MollifierSpec::dyadic(q, s, big_n, sel.divisor)?), Piece::KQs)
            }
            "kminor" => (Evaluator::Minor(DyadicLayout::new(big_n, sel.divisor)?), Piece::Kminor),
            "k1" => {
                let layout = DyadicLayout::new(big_n, sel.divisor)?;
                if sel.index >= layout.pieces.len() {
                    return Err(CliError::Invalid(format!("--index must be below {}", layout.pieces.len())));
                }
                (Evaluator::K1(layout, sel.index), Piece::K1)
            }
            "k-minus-kq" => (Evaluator::Remainder(MollifierSpec::prime(q, big_n)?), Piece::K),
            other => return Err(CliError::Invalid(format!("unknown piece {other:?}"))),
        })
    }

    fn eval(&self, shell: &SphereShell, p: &KernelParams, x: &[f64], ctl: QuadControl) -> restlab_core::Result<(Complex64, usize, f64)> {
        let unpack = |s: KernelSample| (s.value, s.quadrature_nodes, s.est_error);
        match self {
            Evaluator::Direct => Ok((kernel_direct(shell, x), shell.len(), 0.0)),
            Evaluator::Major(spec) => kernel_piece(spec, p, x, ctl).map(unpack),
            Evaluator::Minor(layout) => kernel_minor(layout, p, x, ctl.tol).map(unpack),
            Evaluator::K1(layout, i) => kernel_k1(layout, *i, p, x, ctl.tol).map(unpack),
            Evaluator::Remainder(spec) => {
                let kq = kernel_piece(spec, p, x, ctl)?;
                Ok((kernel_direct(shell, x) - kq.value, kq.quadrature_nodes, kq.est_error))
            }
        }
    }
}

pub fn run(ctx: &Context, c: KernelCmd) -> CliResult<Outcome> {
    match c {
        KernelCmd::Direct { shell, at } => {
            let s = load_shell(&shell)?;
            let pts = points(ctx, &at, s.dim())?;
            let mut rows = Vec::new();
            let mut values = Vec::new();
            for x in &pts {
                let v = kernel_direct(&s, x);
                let mut row = num_row(x);
                row.extend(num_row(&[v.re, v.im]));
                rows.push(row);
                values.push(json!({"x": x, "re": v.re, "im": v.im}));
            }
            let mut rep = ExperimentReport::new("kernel_direct", json!({"n": shell.n, "lambda": shell.lambda}));
            rep.set("shell_size", s.len());
            rep.set("values", values);
            let summary = pts
                .iter()
                .zip(&rows)
                .map(|(x, r)| format!("K({x:?}) = {} {:+}i", r[x.len()], r[x.len() + 1]))
                .collect();
            emit_table(ctx, rep, table(s.dim(), &["re", "im"]), rows, summary)
        }
        KernelCmd::Integral { shell, at, nodes } => {
            let s = load_shell(&shell)?;
            let p = KernelParams::for_shell(&s);
            let nodes = nodes.unwrap_or_else(|| integral_node_threshold(&p));
            let pts = points(ctx, &at, s.dim())?;
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            for x in &pts {
                let v = kernel_integral(&p, x, nodes)?.value;
                let d = kernel_direct(&s, x);
                let rel = (v - d).norm() / d.norm().max(1.0);
                worst = worst.max(rel);
                let mut row = num_row(x);
                row.extend(num_row(&[v.re, v.im, d.re, d.im, rel]));
                rows.push(row);
            }
            let mut rep = ExperimentReport::new("kernel_integral", json!({"n": shell.n, "lambda": shell.lambda, "nodes": nodes}));
            rep.set("max_relative_error", worst);
            rep.verdict = Some(worst <= 1e-6);
            let summary = vec![format!("{} points, {nodes} nodes: max relative error vs direct sum {worst:.3e}", pts.len())];
            emit_table(ctx, rep, table(s.dim(), &["re", "im", "direct_re", "direct_im", "rel_error"]), rows, summary)
        }
        KernelCmd::Piece { shell, at, piece, tol } => {
            let s = load_shell(&shell)?;
            let p = KernelParams::for_shell(&s);
            let (ev, _) = Evaluator::new(&piece, s.big_n())?;
            let pts = points(ctx, &at, s.dim())?;
            let ctl = QuadControl { tol, checked: true };
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for x in &pts {
                let (v, nodes, err) = ev.eval(&s, &p, x, ctl)?;
                let mut row = num_row(x);
                row.extend(num_row(&[v.re, v.im, nodes as f64, err]));
                rows.push(row);
                summary.push(format!("{}({x:?}) = {:.10} {:+.10}i  (nodes {nodes}, est. error {err:.1e})", piece.piece, v.re, v.im));
            }
            let rep = ExperimentReport::new(
                "kernel_piece",
                json!({"n": shell.n, "lambda": shell.lambda, "piece": piece.piece, "q": piece.q, "s": piece.s, "divisor": piece.divisor}),
            );
            emit_table(ctx, rep, table(s.dim(), &["re", "im", "nodes", "est_error"]), rows, summary)
        }
        KernelCmd::Fourier { shell, piece, k } => fourier(ctx, shell, piece, k),
        KernelCmd::Supnorm { shell, piece, samples } => supnorm(ctx, shell, piece, samples),
        KernelCmd::Levelchain(a) => levelchain(ctx, a),
    }
}

fn fourier(ctx: &Context, shell: ShellSel, sel: PieceSel, k: Vec<i64>) -> CliResult<Outcome> {
    let s = load_shell(&shell)?;
    let p = KernelParams::for_shell(&s);
    let big_n = s.big_n();
    let q = sel.q.unwrap_or(big_n);
    let (prime, dyadic_spec, layout);
    let fp = match sel.piece.as_str() {
        "k-minus-kq" | "kq" => {
            prime = MollifierSpec::prime(q, big_n)?;
            FourierPiece::KMinusKQ(&prime)
        }
        "kqs" => {
            let sv = sel.s.ok_or_else(|| CliError::Invalid("kqs needs --s".into()))?;
            dyadic_spec = MollifierSpec::dyadic(q, sv, big_n, sel.divisor)?;
            FourierPiece::KQs(&dyadic_spec)
        }
        "kminor" => {
            layout = DyadicLayout::new(big_n, sel.divisor)?;
            FourierPiece::KMinor(&layout)
        }
        "k1" => {
            layout = DyadicLayout::new(big_n, sel.divisor)?;
            FourierPiece::K1(&layout, sel.index)
        }
        other => return Err(CliError::Invalid(format!("no Fourier form for piece {other:?}"))),
    };
    let params = json!({"n": shell.n, "lambda": shell.lambda, "piece": sel.piece, "q": q, "s": sel.s, "divisor": sel.divisor});
    if !k.is_empty() {
        let v = fourier_coefficient(fp, &p, &k)?;
        let mut rep = ExperimentReport::new("kernel_fourier", params);
        rep.set("k", &k);
        rep.set("value", [v.re, v.im]);
        return ctx.emit(&rep, vec![format!("coefficient at {k:?} = {:.12} {:+.12}i", v.re, v.im)]);
    }
    let (sup, arg) = fourier_sup(fp, &p)?;
    let scaled = sup * q as f64;
    let reference = 20.0 * (big_n as f64).powf(0.2);
    let mut rep = ExperimentReport::new("kernel_fourier_sup", params);
    rep.set("sup", sup);
    rep.set("argmax", &arg);
    rep.set("sup_times_q", scaled);
    rep.set("reference_20_n_0_2", reference);
    if matches!(fp, FourierPiece::KMinusKQ(_)) {
        rep.verdict = Some(scaled <= reference);
    }
    ctx.emit(&rep, vec![format!("max |coefficient| = {sup:.6e} at {arg:?}; times Q = {scaled:.4} (20 N^0.2 = {reference:.3})")])
}

fn supnorm(ctx: &Context, shell: ShellSel, sel: PieceSel, samples: usize) -> CliResult<Outcome> {
    let seed = ctx.seed("kernel supnorm")?;
    if samples < 1000 {
        return Err(CliError::Invalid("--samples must be at least 1000".into()));
    }
    let s = load_shell(&shell)?;
    let p = KernelParams::for_shell(&s);
    let (ev, piece) = Evaluator::new(&sel, s.big_n())?;
    let ctl = QuadControl { tol: None, checked: false };
    let cfg = SupNormConfig::new(samples, seed);
    let est = sup_norm_estimate(|x: &[f64]| ev.eval(&s, &p, x, ctl).map(|v| v.0.norm()).unwrap_or(0.0), s.dim(), s.big_n(), &cfg);
    let q = sel.q.unwrap_or(s.big_n());
    let reference = sup_norm_reference(piece, &p, q, sel.s.unwrap_or(0));
    let mut rep = ExperimentReport::new(
        "kernel_supnorm",
        json!({"n": shell.n, "lambda": shell.lambda, "piece": sel.piece, "q": q, "s": sel.s, "divisor": sel.divisor, "samples": samples, "seed": seed}),
    );
    rep.set("estimate", est.value);
    rep.set("point", &est.point);
    rep.set("evaluations", est.evaluations);
    rep.set("reference", reference);
    rep.set("ratio", est.value / reference);
    ctx.emit(
        &rep,
        vec![format!("sup |{}| >= {:.6} at {:?}; reference {reference:.4}, ratio {:.4}", sel.piece, est.value, est.point, est.value / reference)],
    )
}

fn levelchain(ctx: &Context, a: LevelChainArgs) -> CliResult<Outcome> {
    let seed = ctx.seed("kernel levelchain")?;
    let s = load_shell(&a.shell)?;
    if s.is_empty() {
        return Err(restlab_core::Error::EmptyShell.into());
    }
    let kind: CoeffKind = a.coeffs.parse()?;
    let q = a.q.unwrap_or(s.big_n());
    let alpha = a.alpha.unwrap_or_else(|| (s.big_n() as f64).powf(a.alpha_exp));
    let bounds = ChainBounds::compute(&s, q, &SupNormConfig::new(a.sup_samples, seed))?;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut all = true;
    for d in 0..a.draws {
        let c = make_coefficients_tagged(&s, kind, seed, d as u64)?;
        let r = levelset_chain_check(&s, &c, alpha, &bounds, a.samples, seed)?;
        for t in &r.terms {
            let mut row = num_row(&[d as f64]);
            row.push(t.name.to_string());
            row.extend(num_row(&[t.lhs, t.rhs, t.sigma]));
            row.push(t.holds.to_string());
            rows.push(row);
        }
        all &= r.holds;
        reports.push(r);
    }
    let mut rep = ExperimentReport::new(
        "levelchain",
        json!({"n": a.shell.n, "lambda": a.shell.lambda, "q": q, "alpha": alpha, "coeffs": a.coeffs, "draws": a.draws, "samples": a.samples, "sup_samples": a.sup_samples, "seed": seed}),
    );
    rep.set("bounds", bounds);
    rep.set("draws", &reports);
    rep.verdict = Some(all);
    let in_set: Vec<usize> = reports.iter().map(|r| r.samples_in_set).collect();
    let summary = vec![
        format!("alpha = {alpha:.4}; sup K^Q >= {:.3}, max Fourier coefficient of K - K^Q = {:.3e}", bounds.kq_sup, bounds.fourier_sup),
        format!("samples in the level set per draw: {in_set:?}"),
        format!("all inequalities hold within 3 sigma: {all}"),
    ];
    ctx.emit(&rep.with_table(&["draw", "term", "lhs", "rhs", "sigma", "holds"], rows), summary)
}
