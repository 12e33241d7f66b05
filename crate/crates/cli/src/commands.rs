use std::io::Write;
use std::path::Path;

use ppa_core::certificate::certify_sweep;
use ppa_core::engine::{run as run_trace, Verdict};
use ppa_core::grid::{
    default_gammas, default_tsqs, examples_sweep, gamma_grid, region_map, tsq_grid, ExampleCell,
};
use ppa_core::oracle::worst_case_ratio;
use ppa_core::rates::rho_opt;
use ppa_core::{CSchedule, OperatorSpec, PpaError, RunConfig, StepParams};
use serde_json::json;

use crate::output::num;

/// Allowed distance between the oracle supremum and the closed form.
pub const WORSTCASE_TOL: f64 = 5e-4;
/// Allowed excess of the oracle supremum over the closed form.
pub const SOUNDNESS_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum CliError {
    Violation(String),
    Usage(String),
    /// The reader went away, e.g. output piped into `head`.
    Closed,
}

impl From<PpaError> for CliError {
    fn from(e: PpaError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            CliError::Closed
        } else {
            CliError::Usage(format!("write failed: {e}"))
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(e) => e.into(),
            other => CliError::Usage(format!("write failed: {other:?}")),
        }
    }
}

type CmdResult = Result<(), CliError>;

pub fn seed_from_env() -> u64 {
    std::env::var("PPA_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(42)
}

fn json_line(out: &mut impl Write, v: &serde_json::Value) -> CmdResult {
    let s = serde_json::to_string_pretty(v).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

pub fn bounds(out: &mut impl Write, gamma: f64, a: f64, c: f64, as_json: bool) -> CmdResult {
    let b = StepParams::new(gamma, a, c)?.bundle();
    if as_json {
        return json_line(
            out,
            &json!({
                "gamma": b.gamma,
                "a": a,
                "c": c,
                "t": b.t,
                "regime": b.regime,
                "rho_u": b.rho_u,
                "rho_l": b.rho_l,
                "rho_opt": b.rho_opt,
                "rho_ty": b.rho_ty,
                "gap": b.gap(),
            }),
        );
    }
    let rows = [
        ("gamma", num(b.gamma)),
        ("a", num(a)),
        ("c", num(c)),
        ("t", num(b.t)),
        ("regime", format!("{:?}", b.regime)),
        ("rho_u", num(b.rho_u)),
        ("rho_l", num(b.rho_l)),
        ("rho_opt", num(b.rho_opt)),
        ("rho_ty", num(b.rho_ty)),
        ("gap", num(b.gap())),
    ];
    for (k, v) in rows {
        writeln!(out, "{k:<8} {v}")?;
    }
    Ok(())
}

pub fn regionmap(
    out: &mut impl Write,
    gamma_steps: Option<usize>,
    tsq_steps: Option<usize>,
    gamma_max: f64,
    tsq_max: f64,
) -> CmdResult {
    let gammas = match gamma_steps {
        Some(n) => gamma_grid(n, gamma_max)?,
        None => default_gammas(),
    };
    let tsqs = match tsq_steps {
        Some(n) => tsq_grid(n, tsq_max)?,
        None => default_tsqs(),
    };
    let cells = region_map(&gammas, &tsqs)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "t_sq", "regime", "rho_opt", "rho_ty", "gap", "rho_u", "rho_l"])?;
    for c in &cells {
        w.write_record([
            num(c.gamma),
            num(c.t_sq),
            format!("{:?}", c.regime),
            num(c.rho_opt),
            num(c.rho_ty),
            num(c.gap),
            num(c.rho_u),
            num(c.rho_l),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    out: &mut impl Write,
    op: &Path,
    gamma: f64,
    c: &[f64],
    iters: usize,
    z0: &[f64],
    tau: Option<f64>,
    stop_tol: f64,
) -> CmdResult {
    let text = std::fs::read_to_string(op)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", op.display())))?;
    let spec = OperatorSpec::from_json(&text)?;
    let c_schedule = match c {
        [] => return Err(CliError::Usage("--c is required".into())),
        [c] => CSchedule::Constant(*c),
        cs => CSchedule::List(cs.to_vec()),
    };
    let config = RunConfig {
        gamma,
        c_schedule,
        max_iters: iters,
        stop_tol,
        tau: tau.unwrap_or(f64::INFINITY),
    };
    let trace = run_trace(&spec, &config, z0)?;

    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(["k", "residual", "dist", "ratio_sq", "rho_opt", "rho_ty", "in_window"])?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            num(r.residual),
            num(r.dist),
            num(r.step_ratio_sq),
            num(r.predicted_rho),
            num(r.rho_ty),
            r.in_window.to_string(),
        ])?;
    }
    w.flush()?;
    drop(w);

    let excess = trace.max_bound_excess();
    if excess > 1e-10 {
        return Err(CliError::Violation(format!(
            "observed ratio exceeds rho_opt by {excess:e}"
        )));
    }
    Ok(())
}

fn cell_row(c: &ExampleCell) -> String {
    format!(
        "{:<6} {:>4.2} {:>5.2} {:<8} {:>24} {:>10.3e} {:<5} {}",
        format!("{:?}", c.operator).to_lowercase(),
        c.gamma,
        c.t_sq,
        format!("{:?}", c.regime),
        num(c.formula),
        c.max_dev,
        c.asserted,
        c.verdict,
    )
}

pub fn examples(out: &mut impl Write, iters: usize, as_json: bool) -> CmdResult {
    if iters == 0 {
        return Err(CliError::Usage("--iters must be positive".into()));
    }
    let cells = examples_sweep(&default_gammas(), &default_tsqs(), iters)?;
    let failed: Vec<&ExampleCell> = cells.iter().filter(|c| !c.passed).collect();
    let header = format!(
        "{:<6} {:>4} {:>5} {:<8} {:>24} {:>10} {:<5} {}",
        "op", "gamma", "t_sq", "regime", "formula", "max_dev", "check", "verdict"
    );

    if as_json {
        let v = serde_json::to_value(&cells).map_err(|e| CliError::Usage(e.to_string()))?;
        json_line(
            out,
            &json!({
                "iters": iters,
                "cells": v,
                "asserted": cells.iter().filter(|c| c.asserted).count(),
                "failed": failed.len(),
            }),
        )?;
    } else {
        writeln!(out, "{header}")?;
        for c in &cells {
            writeln!(out, "{}", cell_row(c))?;
        }
        let attained = cells
            .iter()
            .filter(|c| c.asserted && c.verdict == Verdict::Attained)
            .count();
        let asserted = cells.iter().filter(|c| c.asserted).count();
        writeln!(out, "attained {attained}/{asserted} asserted cells")?;
    }

    if failed.is_empty() {
        return Ok(());
    }
    let mut table = String::from("cells that failed:\n");
    table.push_str(&header);
    for c in failed {
        table.push('\n');
        table.push_str(&cell_row(c));
    }
    Err(CliError::Violation(table))
}

pub fn certify(out: &mut impl Write, samples: usize, seed: u64) -> CmdResult {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let report = certify_sweep(samples, seed);
    let v = serde_json::to_value(&report).map_err(|e| CliError::Usage(e.to_string()))?;
    json_line(out, &v)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Violation(format!(
            "identities {}, multiplier feasibility {}",
            report.identities, report.multiplier_feasibility
        )))
    }
}

pub fn worstcase(out: &mut impl Write, gamma: f64, t: f64, resolution: usize) -> CmdResult {
    let r = worst_case_ratio(gamma, t, resolution)?;
    let (rho, regime) = rho_opt(gamma, t)?;
    let gap = (r.sup_ratio - rho).abs();
    json_line(
        out,
        &json!({
            "gamma": gamma,
            "t": t,
            "resolution": resolution,
            "sup_ratio": r.sup_ratio,
            "argmax": [r.argmax.x, r.argmax.y],
            "rho_opt": rho,
            "gap": gap,
            "regime": regime,
            "final_spacing": r.final_spacing,
            "feasible_points": r.feasible_points,
        }),
    )?;
    if r.sup_ratio > rho + SOUNDNESS_TOL {
        return Err(CliError::Violation(format!(
            "sup_ratio {} exceeds rho_opt {}",
            num(r.sup_ratio),
            num(rho)
        )));
    }
    if gap > WORSTCASE_TOL {
        return Err(CliError::Violation(format!("gap {gap:e} exceeds {WORSTCASE_TOL:e}")));
    }
    Ok(())
}
