//! The relaxed proximal point iteration and per-step bound checks.

use serde::{Deserialize, Serialize};

use crate::error::{PpaError, Result};
use crate::operators::{norm, OperatorSpec};
use crate::rates::{check_gamma, rho_opt, rho_ty};

/// Below this distance the squared step ratio is not formed.
pub const DIST_FLOOR: f64 = 1e-300;

/// Largest slack `ρ_opt − observed` that still counts as attaining the bound.
pub const ATTAIN_TOL: f64 = 1e-10;

/// Proximal parameters `c₀, c₁, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CSchedule {
    Constant(f64),
    /// Explicit values; the last one is held once the list is exhausted.
    List(Vec<f64>),
}

impl CSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            CSchedule::Constant(c) => *c,
            CSchedule::List(cs) => cs[k.min(cs.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |c: f64| !(c.is_finite() && c > 0.0);
        match self {
            CSchedule::Constant(c) if bad(*c) => {
                Err(PpaError::InvalidParameter { name: "c", value: *c })
            }
            CSchedule::List(cs) if cs.is_empty() => {
                Err(PpaError::InvalidConfig("empty c schedule".into()))
            }
            CSchedule::List(cs) => match cs.iter().find(|c| bad(**c)) {
                Some(&c) => Err(PpaError::InvalidParameter { name: "c", value: c }),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub gamma: f64,
    pub c_schedule: CSchedule,
    pub max_iters: usize,
    /// Stop once `‖zᵏ − z̃ᵏ‖ / cₖ ≤ stop_tol`.
    pub stop_tol: f64,
    /// Radius of the regularity window; `∞` puts every step inside it.
    pub tau: f64,
}

impl RunConfig {
    pub fn constant(gamma: f64, c: f64, max_iters: usize) -> Self {
        Self {
            gamma,
            c_schedule: CSchedule::Constant(c),
            max_iters,
            stop_tol: 0.0,
            tau: f64::INFINITY,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_stop_tol(mut self, stop_tol: f64) -> Self {
        self.stop_tol = stop_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        self.c_schedule.validate()?;
        if self.max_iters == 0 {
            return Err(PpaError::InvalidConfig("max_iters must be positive".into()));
        }
        if self.stop_tol.is_nan() || self.stop_tol < 0.0 {
            return Err(PpaError::InvalidParameter {
                name: "stop_tol",
                value: self.stop_tol,
            });
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(PpaError::InvalidParameter {
                name: "tau",
                value: self.tau,
            });
        }
        Ok(())
    }
}

/// One iteration `k`, recorded at `zᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub z: Vec<f64>,
    pub z_tilde: Vec<f64>,
    pub c: f64,
    pub t: f64,
    /// `‖zᵏ − z̃ᵏ‖ / cₖ`
    pub residual: f64,
    /// `‖zᵏ − z*‖`
    pub dist: f64,
    /// `‖zᵏ⁺¹ − z*‖² / ‖zᵏ − z*‖²`, NaN when `dist ≤ DIST_FLOOR`.
    pub step_ratio_sq: f64,
    pub predicted_rho: f64,
    pub rho_ty: f64,
    pub in_window: bool,
}

impl StepRecord {
    /// Steps whose ratio is defined and that lie inside the regularity window.
    pub fn is_checked(&self) -> bool {
        self.in_window && self.step_ratio_sq.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub gamma: f64,
    pub a: f64,
    pub tau: f64,
    pub records: Vec<StepRecord>,
    /// `‖zᴺ − z*‖` for the iterate after the last record.
    pub final_dist: f64,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distances `‖zᵏ − z*‖` for every record followed by the final iterate.
    pub fn distances(&self) -> impl Iterator<Item = f64> + '_ {
        self.records
            .iter()
            .map(|r| r.dist)
            .chain(std::iter::once(self.final_dist))
    }

    /// Largest increase of the distance to the solution between consecutive
    /// iterates (nonpositive for a Fejér monotone run).
    pub fn max_dist_increase(&self) -> f64 {
        let d: Vec<f64> = self.distances().collect();
        d.windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `observed − ρ_opt` over checked steps.
    pub fn max_bound_excess(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.is_checked())
            .map(|r| r.step_ratio_sq - r.predicted_rho)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One relaxed proximal step: `z̃ = J_{cT}(z)`, `z⁺ = (1 − γ)z + γz̃`.
pub fn step(spec: &OperatorSpec, gamma: f64, c: f64, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_gamma(gamma)?;
    let z_tilde = spec.resolvent(c, z)?;
    let z_next = z
        .iter()
        .zip(&z_tilde)
        .map(|(zi, wi)| (1.0 - gamma) * zi + gamma * wi)
        .collect();
    Ok((z_tilde, z_next))
}

/// Runs the iteration from `z0` until `max_iters` steps or the stopping test.
pub fn run(spec: &OperatorSpec, config: &RunConfig, z0: &[f64]) -> Result<Trace> {
    config.validate()?;
    if z0.len() != spec.dimension() {
        return Err(PpaError::DimensionMismatch {
            expected: spec.dimension(),
            got: z0.len(),
        });
    }
    if z0.iter().any(|v| !v.is_finite()) {
        return Err(PpaError::NonFinite { k: 0 });
    }
    let a = spec.inverse_modulus().a;
    let gamma = config.gamma;
    let mut records = Vec::with_capacity(config.max_iters.min(4096));
    let mut z = z0.to_vec();

    for k in 0..config.max_iters {
        let c = config.c_schedule.at(k);
        let (z_tilde, z_next) = step(spec, gamma, c, &z)?;
        if z_next.iter().chain(&z_tilde).any(|v| !v.is_finite()) {
            return Err(PpaError::NonFinite { k: k + 1 });
        }
        let t = a / c;
        let diff: Vec<f64> = z.iter().zip(&z_tilde).map(|(x, y)| x - y).collect();
        let residual = norm(&diff) / c;
        let dist = norm(&z);
        let next_dist = norm(&z_next);
        let step_ratio_sq = if dist <= DIST_FLOOR {
            f64::NAN
        } else {
            (next_dist / dist).powi(2)
        };
        records.push(StepRecord {
            k,
            z,
            z_tilde,
            c,
            t,
            residual,
            dist,
            step_ratio_sq,
            predicted_rho: rho_opt(gamma, t)?.0,
            rho_ty: rho_ty(gamma, t)?,
            in_window: residual <= config.tau,
        });
        z = z_next;
        if residual <= config.stop_tol {
            break;
        }
    }

    Ok(Trace {
        gamma,
        a,
        tau: config.tau,
        records,
        final_dist: norm(&z),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every checked step matches `ρ_opt` to within [`ATTAIN_TOL`].
    Attained,
    /// The bound holds but is not reached on some checked step.
    NotAttained,
    /// Some checked step exceeds `ρ_opt` by more than [`ATTAIN_TOL`].
    Violated,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Attained => "attained",
            Verdict::NotAttained => "not attained",
            Verdict::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub k: usize,
    pub observed: f64,
    pub rho_opt: f64,
    pub rho_ty: f64,
    pub slack_opt: f64,
    pub slack_ty: f64,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub rows: Vec<TightnessRow>,
    pub max_slack_opt: f64,
    pub min_slack_opt: f64,
    pub max_slack_ty: f64,
    pub verdict: Verdict,
}

/// Compares every observed step ratio with `ρ_opt` and `ρ_TY`.
pub fn tightness_report(spec: &OperatorSpec, config: &RunConfig, z0: &[f64]) -> Result<TightnessReport> {
    Ok(tightness_of(&run(spec, config, z0)?))
}

pub fn tightness_of(trace: &Trace) -> TightnessReport {
    let rows: Vec<TightnessRow> = trace
        .records
        .iter()
        .filter(|r| r.step_ratio_sq.is_finite())
        .map(|r| TightnessRow {
            k: r.k,
            observed: r.step_ratio_sq,
            rho_opt: r.predicted_rho,
            rho_ty: r.rho_ty,
            slack_opt: r.predicted_rho - r.step_ratio_sq,
            slack_ty: r.rho_ty - r.step_ratio_sq,
            in_window: r.in_window,
        })
        .collect();
    let checked = || rows.iter().filter(|r| r.in_window);
    let max_slack_opt = checked().map(|r| r.slack_opt).fold(f64::NEG_INFINITY, f64::max);
    let min_slack_opt = checked().map(|r| r.slack_opt).fold(f64::INFINITY, f64::min);
    let max_slack_ty = checked().map(|r| r.slack_ty).fold(f64::NEG_INFINITY, f64::max);
    let verdict = if checked().next().is_none() {
        Verdict::NotAttained
    } else if min_slack_opt < -ATTAIN_TOL {
        Verdict::Violated
    } else if max_slack_opt <= ATTAIN_TOL {
        Verdict::Attained
    } else {
        Verdict::NotAttained
    };
    TightnessReport {
        rows,
        max_slack_opt,
        min_slack_opt,
        max_slack_ty,
        verdict,
    }
}

/// Smallest `k` from which every recorded residual is at most `tau`, or
/// `None` if the last record is still outside.
pub fn regularity_window(trace: &Trace, tau: f64) -> Result<Option<usize>> {
    if trace.is_empty() {
        return Err(PpaError::InvalidConfig("empty trace".into()));
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(PpaError::InvalidParameter { name: "tau", value: tau });
    }
    let last_outside = trace.records.iter().rposition(|r| r.residual.is_nan() || r.residual > tau);
    Ok(match last_outside {
        None => Some(0),
        Some(i) if i + 1 < trace.len() => Some(trace.records[i + 1].k),
        Some(_) => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn step_examples() {
        let skew = OperatorSpec::skew(1.0).unwrap();
        let (zt, zn) = step(&skew, 1.0, 1.0, &[1.0, 0.0]).unwrap();
        assert_eq!(zt, vec![0.5, 0.5]);
        assert_eq!(zn, vec![0.5, 0.5]);

        let (zt, zn) = step(&skew, 0.3, 2.0, &[0.0, 0.0]).unwrap();
        assert_eq!((zt, zn), (vec![0.0, 0.0], vec![0.0, 0.0]));

        let sc = OperatorSpec::scalar(1.0).unwrap();
        let (zt, zn) = step(&sc, 0.5, 4.0, &[1.0]).unwrap();
        assert_abs_diff_eq!(zt[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(zn[0], 0.6, epsilon = 1e-15);

        assert!(step(&sc, 2.0, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn skew_run_attains_upper_bound() {
        let skew = OperatorSpec::skew(1.0).unwrap();
        let trace = run(&skew, &RunConfig::constant(1.0, 1.0, 20), &[1.0, 0.0]).unwrap();
        assert_eq!(trace.len(), 20);
        for r in &trace.records {
            assert_abs_diff_eq!(r.step_ratio_sq, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(r.dist, 2f64.powf(-(r.k as f64) / 2.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn scalar_run_attains_lower_bound() {
        let sc = OperatorSpec::scalar(1.0).unwrap();
        let trace = run(&sc, &RunConfig::constant(0.5, 4.0, 20), &[1.0]).unwrap();
        assert_eq!(trace.len(), 20);
        for r in &trace.records {
            assert_abs_diff_eq!(r.step_ratio_sq, 0.36, epsilon = 1e-12);
        }
    }

    #[test]
    fn starting_at_solution() {
        let skew = OperatorSpec::skew(1.0).unwrap();
        let trace = run(&skew, &RunConfig::constant(1.0, 1.0, 20), &[0.0, 0.0]).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.records[0].residual, 0.0);
        assert!(trace.records[0].step_ratio_sq.is_nan());
        assert!(!trace.records[0].is_checked());
    }

    #[test]
    fn stop_tol_ends_run() {
        let sc = OperatorSpec::scalar(1.0).unwrap();
        let cfg = RunConfig::constant(1.0, 1.0, 1000).with_stop_tol(1e-6);
        let trace = run(&sc, &cfg, &[1.0]).unwrap();
        let last = trace.records.last().unwrap();
        assert!(last.residual <= 1e-6);
        assert!(trace.records[..trace.len() - 1].iter().all(|r| r.residual > 1e-6));
    }

    #[test]
    fn schedule_recomputes_bound() {
        let sc = OperatorSpec::scalar(1.0).unwrap();
        let cfg = RunConfig {
            gamma: 0.5,
            c_schedule: CSchedule::List(vec![4.0, 2.0, 1.0]),
            max_iters: 5,
            stop_tol: 0.0,
            tau: f64::INFINITY,
        };
        let trace = run(&sc, &cfg, &[1.0]).unwrap();
        let ts: Vec<f64> = trace.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0.25, 0.5, 1.0, 1.0, 1.0]);
        for r in &trace.records {
            assert_eq!(r.predicted_rho, rho_opt(0.5, r.t).unwrap().0);
            assert!(r.step_ratio_sq <= r.predicted_rho + 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let sc = OperatorSpec::scalar(1.0).unwrap();
        let ok = RunConfig::constant(1.0, 1.0, 10);
        assert!(run(&sc, &ok, &[1.0, 2.0]).is_err());
        assert!(run(&sc, &ok, &[f64::NAN]).is_err());
        for bad in [
            RunConfig::constant(0.0, 1.0, 10),
            RunConfig::constant(1.0, 0.0, 10),
            RunConfig::constant(1.0, 1.0, 0),
            RunConfig::constant(1.0, 1.0, 10).with_tau(0.0),
            RunConfig::constant(1.0, 1.0, 10).with_stop_tol(-1.0),
            RunConfig { c_schedule: CSchedule::List(vec![]), ..ok.clone() },
            RunConfig { c_schedule: CSchedule::List(vec![1.0, -1.0]), ..ok.clone() },
        ] {
            assert!(run(&sc, &bad, &[1.0]).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn tightness_examples() {
        let skew = OperatorSpec::skew(1.0).unwrap();
        let rep = tightness_report(&skew, &RunConfig::constant(1.0, 1.0, 20), &[1.0, 0.0]).unwrap();
        assert_eq!(rep.verdict, Verdict::Attained);
        assert!(rep.max_slack_opt.abs() <= 1e-12);
        assert!(rep.rows.iter().all(|r| r.slack_ty.abs() <= 1e-12));

        let sc = OperatorSpec::scalar(1.0).unwrap();
        let rep = tightness_report(&sc, &RunConfig::constant(0.5, 4.0, 20), &[1.0]).unwrap();
        assert_eq!(rep.verdict, Verdict::Attained);
        // t = 0.25: ρ_TY = 1 − 0.5/1.0625 = 9/17 against an observed 0.36.
        for r in &rep.rows {
            assert_abs_diff_eq!(r.slack_ty, 9.0 / 17.0 - 0.36, epsilon = 1e-12);
        }

        let id = OperatorSpec::dense(DMatrix::identity(2, 2)).unwrap();
        let rep = tightness_report(&id, &RunConfig::constant(1.0, 1.0, 20), &[1.0, -1.0]).unwrap();
        assert_eq!(rep.verdict, Verdict::NotAttained);
        for r in &rep.rows {
            assert_abs_diff_eq!(r.observed, 0.25, epsilon = 1e-14);
            assert_abs_diff_eq!(r.rho_opt, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn window_examples() {
        let skew = OperatorSpec::skew(1.0).unwrap();
        let trace = run(&skew, &RunConfig::constant(1.0, 1.0, 10), &[1.0, 0.0]).unwrap();
        assert_eq!(regularity_window(&trace, f64::INFINITY).unwrap(), Some(0));
        assert_abs_diff_eq!(trace.records[0].residual, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(trace.records[1].residual, 0.5);
        assert_eq!(regularity_window(&trace, 0.5).unwrap(), Some(1));
        assert_eq!(regularity_window(&trace, 1e-9).unwrap(), None);
        assert!(regularity_window(&trace, 0.0).is_err());
    }

    #[test]
    fn in_window_flag_follows_tau() {
        let skew = OperatorSpec::skew(1.0).unwrap();
        let cfg = RunConfig::constant(1.0, 1.0, 5).with_tau(0.5);
        let trace = run(&skew, &cfg, &[1.0, 0.0]).unwrap();
        let flags: Vec<bool> = trace.records.iter().map(|r| r.in_window).collect();
        assert_eq!(flags, vec![false, true, true, true, true]);
    }

    #[test]
    fn fejer_on_rotation_for_all_gamma() {
        let skew = OperatorSpec::skew(0.7).unwrap();
        for g in [0.05, 0.5, 1.0, 1.5, 1.95] {
            let trace = run(&skew, &RunConfig::constant(g, 0.3, 100), &[2.0, -1.0]).unwrap();
            assert!(trace.max_dist_increase() <= 1e-12);
            assert!(trace.max_bound_excess() <= 1e-10);
        }
    }
}
