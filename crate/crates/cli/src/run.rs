//! Command execution.

use std::time::Instant;

use gtfk::oracles::{
    bond_from_convolution, bond_from_pde, convolution_grid, monte_carlo_bond, short_time_convolution,
    solve_fokker_planck, PdeGrid,
};
use gtfk::pricing::{default_y_grid, vasicek_exact_bond, vasicek_exact_density};
use gtfk::{
    density_curve, solve_self_consistent, zero_coupon_bond, DensityCurve, Error, NumericsConfig,
    ShortRateModel, TransformedModel,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{Artifact, Cell};
use crate::spec::{CommandName, MethodName, RunSpec};
use crate::tables::TableRow;

/// Result of a command: the artifact to write and, for tables, the failed rows.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifact: Artifact,
    pub breaches: Vec<String>,
}

struct Ctx<'a> {
    spec: &'a RunSpec,
    model: ShortRateModel,
    y0: f64,
    cfg: &'a NumericsConfig,
}

pub fn execute(spec: &RunSpec) -> Result<Outcome, CliError> {
    spec.validate()?;
    let start = Instant::now();
    let model = spec.model.build_model()?;
    let y0 = spec.model.initial_state(&model)?;
    let ctx = Ctx {
        spec,
        model,
        y0,
        cfg: &spec.numerics,
    };
    let mut breaches = Vec::new();
    let (mut artifact, extra) = match spec.command {
        CommandName::Density => run_density(&ctx)?,
        CommandName::Bond | CommandName::Oracle => run_bond(&ctx)?,
        CommandName::Selfconsistent => run_selfconsistent(&ctx)?,
        CommandName::Table => {
            let (a, extra, failed) = run_table(&ctx)?;
            breaches = failed;
            (a, extra)
        }
    };
    let mut meta = json!({
        "spec": spec,
        "model": ctx.model,
        "initial_state": ctx.y0,
        "x0": ctx.model.lamperti(ctx.y0)?,
        "version": env!("CARGO_PKG_VERSION"),
    });
    if let Value::Object(extra) = extra {
        meta.as_object_mut().unwrap().extend(extra);
    }
    if spec.timings {
        meta["timings"] = json!({ "total_seconds": start.elapsed().as_secs_f64() });
    }
    artifact.metadata = meta;
    Ok(Outcome { artifact, breaches })
}

fn pde_curve(ctx: &Ctx, horizon: f64) -> Result<DensityCurve, CliError> {
    let x0 = ctx.model.lamperti(ctx.y0)?;
    let grid = PdeGrid::for_model(&ctx.model, ctx.spec.lambda, x0, horizon, ctx.cfg);
    Ok(solve_fokker_planck(&ctx.model, ctx.spec.lambda, x0, horizon, &grid)?)
}

fn conv_curve(ctx: &Ctx, horizon: f64) -> Result<DensityCurve, CliError> {
    let x0 = ctx.model.lamperti(ctx.y0)?;
    let window = PdeGrid::for_model(&ctx.model, ctx.spec.lambda, x0, horizon, ctx.cfg);
    let steps = ctx.cfg.conv_steps;
    let grid = convolution_grid(&ctx.model, &window, horizon, steps, ctx.cfg.conv_nodes_per_sd);
    Ok(short_time_convolution(&ctx.model, ctx.spec.lambda, x0, horizon, steps, &grid)?)
}

fn run_density(ctx: &Ctx) -> Result<(Artifact, Value), CliError> {
    let spec = ctx.spec;
    let main_col = format!("psi_{}", spec.method.as_str());
    let mut cols = vec!["T", "y", main_col.as_str()];
    let with_pde = spec.with_pde && spec.method != MethodName::Pde;
    if with_pde {
        cols.push("psi_pde");
    }
    let mut artifact = Artifact::new(&cols);
    let per_horizon: Vec<(Vec<Vec<Cell>>, Value)> = spec
        .horizons
        .iter()
        .map(|&t| -> Result<_, CliError> {
            let ys = default_y_grid(&ctx.model, ctx.y0, t, ctx.cfg, spec.points)?;
            let (values, diagnostics): (Vec<f64>, Vec<String>) = match spec.method {
                MethodName::Gtfk => {
                    let c = density_curve(&ctx.model, spec.lambda, ctx.y0, t, &ys, ctx.cfg)?;
                    (c.samples.iter().map(|s| s.1).collect(), c.diagnostics)
                }
                MethodName::Exact => {
                    let x0 = ctx.model.lamperti(ctx.y0)?;
                    let v = ys
                        .iter()
                        .map(|&y| vasicek_exact_density(&ctx.model, spec.lambda, x0, y, t))
                        .collect::<gtfk::Result<_>>()?;
                    (v, Vec::new())
                }
                MethodName::Pde => {
                    let c = pde_curve(ctx, t)?;
                    (ys.iter().map(|&y| c.interpolate(y)).collect(), c.diagnostics)
                }
                MethodName::Conv => {
                    let c = conv_curve(ctx, t)?;
                    (ys.iter().map(|&y| c.interpolate(y)).collect(), c.diagnostics)
                }
                MethodName::Mc => unreachable!("rejected by validation"),
            };
            let pde = if with_pde {
                let c = pde_curve(ctx, t)?;
                Some(ys.iter().map(|&y| c.interpolate(y)).collect::<Vec<_>>())
            } else {
                None
            };
            let rows = ys
                .iter()
                .enumerate()
                .map(|(i, &y)| {
                    let mut r = vec![Cell::Num(t), Cell::Num(y), Cell::Num(values[i])];
                    if let Some(p) = &pde {
                        r.push(Cell::Num(p[i]));
                    }
                    r
                })
                .collect();
            let mut info = json!({ "T": t, "diagnostics": diagnostics });
            if let Some(p) = &pde {
                let peak = p.iter().copied().fold(0.0, f64::max);
                let dev = values.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                info["max_deviation_from_pde_over_peak"] = json!(dev / peak);
            }
            Ok((rows, info))
        })
        .collect::<Result<_, _>>()?;
    let mut curves = Vec::new();
    for (rows, info) in per_horizon {
        rows.into_iter().for_each(|r| artifact.push(r));
        curves.push(info);
    }
    Ok((artifact, json!({ "curves": curves })))
}

fn bond_quote(ctx: &Ctx, horizon: f64) -> Result<(f64, f64, Vec<String>), CliError> {
    let (m, lambda, y0, cfg) = (&ctx.model, ctx.spec.lambda, ctx.y0, ctx.cfg);
    let x0 = m.lamperti(y0)?;
    Ok(match ctx.spec.method {
        MethodName::Gtfk => {
            let q = zero_coupon_bond(m, lambda, y0, horizon, cfg)?;
            (q.value, q.err_estimate, q.diagnostics)
        }
        MethodName::Pde => {
            let grid = PdeGrid::for_model(m, lambda, x0, horizon, cfg);
            let q = bond_from_pde(m, lambda, y0, horizon, &grid)?;
            (q.value, q.err_estimate, q.diagnostics)
        }
        MethodName::Conv => {
            let window = PdeGrid::for_model(m, lambda, x0, horizon, cfg);
            let grid = convolution_grid(m, &window, horizon, cfg.conv_steps, cfg.conv_nodes_per_sd);
            let q = bond_from_convolution(m, lambda, y0, horizon, cfg.conv_steps, &grid)?;
            (q.value, q.err_estimate, q.diagnostics)
        }
        MethodName::Mc => {
            let e = monte_carlo_bond(m, lambda, y0, horizon, cfg.mc_paths, cfg.mc_dt, cfg.seed)?;
            (e.value, e.stderr, Vec::new())
        }
        MethodName::Exact => (vasicek_exact_bond(m, lambda, x0, horizon)?, 0.0, Vec::new()),
    })
}

fn run_bond(ctx: &Ctx) -> Result<(Artifact, Value), CliError> {
    let quotes: Vec<(f64, f64, Vec<String>)> = ctx
        .spec
        .horizons
        .par_iter()
        .map(|&t| bond_quote(ctx, t))
        .collect::<Result<_, _>>()?;
    let mut artifact = Artifact::new(&["T", "method", "Z", "err_estimate"]);
    let mut residuals = Vec::new();
    for (&t, (z, err, diagnostics)) in ctx.spec.horizons.iter().zip(quotes) {
        artifact.push(vec![t.into(), ctx.spec.method.as_str().into(), z.into(), err.into()]);
        residuals.push(json!({ "T": t, "err_estimate": err, "diagnostics": diagnostics }));
    }
    Ok((artifact, json!({ "residuals": residuals })))
}

fn status_of(e: &Error) -> Option<&'static str> {
    match e {
        Error::BranchBreakdown { .. } => Some("branch_breakdown"),
        Error::NonConvergence { .. } => Some("non_convergence"),
        _ => None,
    }
}

fn run_selfconsistent(ctx: &Ctx) -> Result<(Artifact, Value), CliError> {
    let spec = ctx.spec;
    let x0 = ctx.model.lamperti(ctx.y0)?;
    let sigma = ctx.model.sigma();
    let mut artifact = Artifact::new(&["T", "xbar", "omega2", "alpha", "w", "rho_diag", "status"]);
    let mut summary = Vec::new();
    for &t in &spec.horizons {
        let half = 2.0 * sigma * t.sqrt();
        let n = spec.points;
        let xbars: Vec<f64> = (0..n)
            .map(|i| x0 - half + 2.0 * half * i as f64 / (n - 1) as f64)
            .collect();
        let rows: Vec<Vec<Cell>> = xbars
            .par_iter()
            .map(|&xbar| -> Result<Vec<Cell>, CliError> {
                match solve_self_consistent(&ctx.model, spec.lambda, t, xbar, ctx.cfg) {
                    Ok(p) => {
                        let rho = p.ln_reduced_density(x0, x0).map(f64::exp);
                        let (rho, status) = match rho {
                            Ok(r) => (Cell::Num(r), "ok"),
                            Err(e) => (Cell::Empty, status_of(&e).ok_or(CliError::from(e))?),
                        };
                        Ok(vec![
                            t.into(),
                            xbar.into(),
                            p.omega2.into(),
                            p.alpha.into(),
                            p.w.into(),
                            rho,
                            status.into(),
                        ])
                    }
                    Err(e) => {
                        let status = status_of(&e).ok_or(CliError::from(e))?;
                        Ok(vec![
                            t.into(),
                            xbar.into(),
                            Cell::Empty,
                            Cell::Empty,
                            Cell::Empty,
                            Cell::Empty,
                            status.into(),
                        ])
                    }
                }
            })
            .collect::<Result<_, _>>()?;
        let flagged = rows.iter().filter(|r| r[6] != Cell::from("ok")).count();
        let alphas: Vec<f64> = rows.iter().filter_map(|r| r[3].as_f64()).collect();
        let spread = if alphas.is_empty() {
            Value::Null
        } else {
            let mean = alphas.iter().sum::<f64>() / alphas.len() as f64;
            let (lo, hi) = alphas
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
            json!((hi - lo) / mean)
        };
        summary.push(json!({ "T": t, "flagged_rows": flagged, "alpha_relative_spread": spread }));
        rows.into_iter().for_each(|r| artifact.push(r));
    }
    Ok((artifact, json!({ "x0": x0, "summary": summary })))
}

type TableResult = (Artifact, Value, Vec<String>);

fn run_table(ctx: &Ctx) -> Result<TableResult, CliError> {
    let id = ctx.spec.table.expect("validated");
    let (m, y0, cfg) = (&ctx.model, ctx.y0, ctx.cfg);
    let x0 = m.lamperti(y0)?;
    let computed: Vec<(f64, f64, f64, f64)> = id
        .rows()
        .par_iter()
        .map(|row: &TableRow| -> Result<_, CliError> {
            let t = row.horizon;
            let g = zero_coupon_bond(m, 1.0, y0, t, cfg)?;
            let grid = PdeGrid::for_model(m, 1.0, x0, t, cfg);
            let p = bond_from_pde(m, 1.0, y0, t, &grid)?;
            Ok((g.value, p.value, g.err_estimate, p.err_estimate))
        })
        .collect::<Result<_, _>>()?;
    let mut artifact = Artifact::new(&[
        "T",
        "Z_gtfk",
        "Z_pde",
        "rel_diff",
        "published_gtfk",
        "published_pde",
        "tol_gtfk",
        "tol_pde",
        "pass",
    ]);
    let mut breaches = Vec::new();
    let mut residuals = Vec::new();
    for (row, &(g, p, g_err, p_err)) in id.rows().iter().zip(&computed) {
        let (g_ok, p_ok) = row.check(g, p);
        if !g_ok {
            breaches.push(format!(
                "{} T={}: gtfk {g} differs from {} by {:.2e} > {:.0e}",
                id.as_str(),
                row.horizon,
                row.gtfk,
                (g - row.gtfk).abs(),
                row.tol_gtfk
            ));
        }
        if !p_ok {
            breaches.push(format!(
                "{} T={}: pde {p} differs from {} by {:.2e} > {:.0e}",
                id.as_str(),
                row.horizon,
                row.pde,
                (p - row.pde).abs(),
                row.tol_pde
            ));
        }
        artifact.push(vec![
            row.horizon.into(),
            g.into(),
            p.into(),
            ((g - p).abs() / p).into(),
            row.gtfk.into(),
            row.pde.into(),
            row.tol_gtfk.into(),
            row.tol_pde.into(),
            (g_ok && p_ok).into(),
        ]);
        residuals.push(json!({ "T": row.horizon, "gtfk_err_estimate": g_err, "pde_err_estimate": p_err }));
    }
    let extra = json!({ "table": id.as_str(), "residuals": residuals, "breaches": breaches });
    Ok((artifact, extra, breaches))
}
