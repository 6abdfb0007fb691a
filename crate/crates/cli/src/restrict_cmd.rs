//! `restrict` subcommands.

use crate::{CliError, CliResult, Context, Outcome, RestrictCmd};
use restlab_core::report::{num_row, ExperimentReport};
use restlab_core::restriction::*;
use restlab_core::sphere::enumerate_shell;
use serde_json::json;

/// Parses `lo:hi:dyadic`, `lo:hi:powers` or a comma-separated list.
pub fn parse_lambdas(spec: &str, n: usize) -> CliResult<(Vec<u64>, String)> {
    let bad = || CliError::Invalid(format!("cannot parse --lambdas {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [lo, hi, rule] => {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            let rule = match rule.trim() {
                "dyadic" => LambdaRule::default(),
                "powers" => LambdaRule::Powers,
                _ => return Err(bad()),
            };
            Ok((select_lambdas(n, lo, hi, rule)?, rule.describe()))
        }
        [list] => {
            let ls = list.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<CliResult<Vec<u64>>>()?;
            Ok((ls, "explicit list".into()))
        }
        _ => Err(bad()),
    }
}

pub fn run(ctx: &Context, c: RestrictCmd) -> CliResult<Outcome> {
    match c {
        RestrictCmd::Norms { shell, coeffs, p, samples, grid } => {
            let seed = ctx.seed("restrict norms")?;
            let s = enumerate_shell(shell.n, shell.lambda)?;
            let c = make_coefficients(&s, coeffs.parse()?, seed)?;
            let mut rep = ExperimentReport::new(
                "norms",
                json!({"n": shell.n, "lambda": shell.lambda, "coeffs": coeffs, "p": p, "samples": samples, "grid": grid, "seed": seed}),
            );
            rep.set("shell_size", s.len());
            rep.set("coefficient_l2", c.norm2);
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            if let Some(g) = grid {
                let mut vals = Vec::new();
                for &pp in &p {
                    if pp.fract() != 0.0 {
                        return Err(CliError::Invalid("grid norms need integer p".into()));
                    }
                    let v = lp_norm_grid(&s, &c, pp as u32, g)?;
                    rows.push(num_row(&[pp, v, 0.0]));
                    summary.push(format!("||F||_{pp} = {v:.12} (exact grid {g})"));
                    vals.push(json!({"p": pp, "value": v}));
                }
                rep.set("norms", vals);
            } else {
                let est = lp_norms_mc(&s, &c, &p, samples, seed)?;
                for e in &est {
                    rows.push(num_row(&[e.p, e.value, e.std_error]));
                    summary.push(format!("||F||_{} = {:.6} +/- {:.6}", e.p, e.value, e.std_error));
                }
                rep.set("norms", &est);
            }
            ctx.emit(&rep.with_table(&["p", "value", "std_error"], rows), summary)
        }
        RestrictCmd::Levelsets { shell, coeffs, alphas, samples } => {
            let seed = ctx.seed("restrict levelsets")?;
            let mut sorted = alphas.clone();
            sorted.sort_by(f64::total_cmp);
            let s = enumerate_shell(shell.n, shell.lambda)?;
            let c = make_coefficients(&s, coeffs.parse()?, seed)?;
            let ls = level_set_mc(&s, &c, &sorted, samples, seed)?;
            let rows = ls.iter().map(|l| num_row(&[l.alpha, l.measure, l.std_error])).collect();
            let summary = ls.iter().map(|l| format!("|E_{}| = {:.6} +/- {:.6}", l.alpha, l.measure, l.std_error)).collect();
            let mut rep = ExperimentReport::new(
                "levelsets",
                json!({"n": shell.n, "lambda": shell.lambda, "coeffs": coeffs, "samples": samples, "seed": seed}),
            );
            rep.set("shell_size", s.len());
            rep.set("level_sets", &ls);
            ctx.emit(&rep.with_table(&["alpha", "measure", "std_error"], rows), summary)
        }
        RestrictCmd::Theorem1 { n, p, lambdas, samples, draws, sampler } => {
            let seed = ctx.seed("restrict theorem1")?;
            let (ls, rule) = parse_lambdas(&lambdas, n)?;
            let sampler = match sampler.as_str() {
                "peaked" => Sampling::Peaked,
                "uniform" => Sampling::Uniform,
                other => return Err(CliError::Invalid(format!("unknown sampler {other:?}"))),
            };
            let cfg = GrowthConfig { n, p, lambdas: ls, lambda_rule: rule, samples, draws, seed, sampler };
            let rep = growth_experiment(&cfg)?;
            let slope = rep.body["fit"]["slope"].as_f64().unwrap_or(f64::NAN);
            let kslope = rep.body["kernel_fit"]["slope"].as_f64().unwrap_or(f64::NAN);
            let predicted = rep.get_f64("predicted_slope").unwrap_or(f64::NAN);
            let summary = vec![
                format!("lambdas {:?}", cfg.lambdas),
                format!("fitted slope {slope:.4} (predicted {predicted:.4}); constant-coefficient slope {kslope:.4}"),
                format!("verdict: {}", if rep.verdict == Some(true) { "within band" } else { "outside band" }),
            ];
            ctx.emit(&rep, summary)
        }
        RestrictCmd::Lowerbounds { n, p, q, lambdas, samples, draws } => {
            let seed = ctx.seed("restrict lowerbounds")?;
            let (ls, _) = parse_lambdas(&lambdas, n)?;
            let cfg = LowerBoundConfig { n, lambdas: ls, p, q, samples, draws, seed };
            let rep = lower_bound_suite(&cfg)?;
            let slope = rep.body["fit"]["slope"].as_f64().unwrap_or(f64::NAN);
            let predicted = rep.get_f64("predicted_slope").unwrap_or(f64::NAN);
            let summary = vec![format!(
                "kernel ratio slope {slope:.4} (predicted {predicted:.4}); near-origin ok: {}; random signs ok: {}",
                rep.body["near_origin_ok"], rep.body["random_signs_ok"]
            )];
            ctx.emit(&rep, summary)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_specs() {
        let (l, _) = parse_lambdas("64:4096:dyadic", 4).unwrap();
        assert_eq!(l.len(), 7);
        assert_eq!(parse_lambdas("5, 25,65", 2).unwrap().0, vec![5, 25, 65]);
        assert!(parse_lambdas("1:2:3:4", 2).is_err());
        assert!(parse_lambdas("a:b:dyadic", 2).is_err());
        assert!(parse_lambdas("64:128:weird", 2).is_err());
    }
}
