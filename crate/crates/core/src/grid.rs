//! Parameter grids over `(γ, t²)`: the region map of the two bounds and the
//! sweep that replays the two extremal operators.

use serde::{Deserialize, Serialize};

use crate::engine::{run, tightness_of, RunConfig, Verdict};
use crate::error::{PpaError, Result};
use crate::operators::OperatorSpec;
use crate::rates::{rate_bundle, Regime};

/// `γ ∈ {0.1, 0.2, …, 1.9}`.
pub fn default_gammas() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 10.0).collect()
}

/// `t² ∈ {0.01, 0.05, 0.1, 0.25, 0.5, 1, 2, 4}`.
pub fn default_tsqs() -> Vec<f64> {
    vec![0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0]
}

/// `steps` values strictly inside `(0, gamma_max)`, evenly spaced.
pub fn gamma_grid(steps: usize, gamma_max: f64) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(PpaError::InvalidParameter {
            name: "gamma_steps",
            value: steps as f64,
        });
    }
    if !(gamma_max > 0.0 && gamma_max <= 2.0) {
        return Err(PpaError::InvalidParameter {
            name: "gamma_max",
            value: gamma_max,
        });
    }
    Ok((1..=steps)
        .map(|i| gamma_max * i as f64 / (steps + 1) as f64)
        .collect())
}

/// `steps` values from 0 to `tsq_max` inclusive.
pub fn tsq_grid(steps: usize, tsq_max: f64) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(PpaError::InvalidParameter {
            name: "tsq_steps",
            value: steps as f64,
        });
    }
    if !(tsq_max.is_finite() && tsq_max > 0.0) {
        return Err(PpaError::InvalidParameter {
            name: "tsq_max",
            value: tsq_max,
        });
    }
    Ok((0..steps)
        .map(|i| tsq_max * i as f64 / (steps - 1) as f64)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub gamma: f64,
    pub t_sq: f64,
    pub regime: Regime,
    pub rho_opt: f64,
    pub rho_ty: f64,
    pub gap: f64,
    pub rho_u: f64,
    pub rho_l: f64,
}

/// One cell per `(γ, t²)` pair, `γ` varying slowest.
pub fn region_map(gammas: &[f64], tsqs: &[f64]) -> Result<Vec<RegionCell>> {
    let mut cells = Vec::with_capacity(gammas.len() * tsqs.len());
    for &gamma in gammas {
        for &t_sq in tsqs {
            if t_sq.is_nan() || t_sq < 0.0 {
                return Err(PpaError::InvalidParameter {
                    name: "t_sq",
                    value: t_sq,
                });
            }
            let b = rate_bundle(gamma, t_sq.sqrt())?;
            cells.push(RegionCell {
                gamma,
                t_sq,
                regime: b.regime,
                rho_opt: b.rho_opt,
                rho_ty: b.rho_ty,
                gap: b.gap(),
                rho_u: b.rho_u,
                rho_l: b.rho_l,
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalOperator {
    /// Rotation, extremal above the line `t² + γ = 1`.
    Skew,
    /// Scalar multiple, extremal below it.
    Scalar,
}

/// Tolerance on `|observed − ρ_u|` for the rotation.
pub const SKEW_TOL: f64 = 1e-10;
/// Tolerance on `|observed − ρ_l|` for the scalar operator.
pub const SCALAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleCell {
    pub operator: ExtremalOperator,
    pub gamma: f64,
    pub t_sq: f64,
    pub c: f64,
    pub regime: Regime,
    /// `ρ_u` for the rotation, `ρ_l` for the scalar operator.
    pub formula: f64,
    pub rho_opt: f64,
    /// Largest `|observed − formula|` over the run.
    pub max_dev: f64,
    /// Whether this cell lies in the region where the operator is extremal.
    pub asserted: bool,
    pub verdict: Verdict,
    pub passed: bool,
}

/// Runs both extremal operators (with `a = 1`, `c = 1/√t²`) on every grid
/// cell. Cells in the operator's own region must reproduce the bound to
/// [`SKEW_TOL`] / [`SCALAR_TOL`] and reach the verdict `attained`; the others
/// are recorded only.
pub fn examples_sweep(gammas: &[f64], tsqs: &[f64], iters: usize) -> Result<Vec<ExampleCell>> {
    let a = 1.0;
    let skew = OperatorSpec::skew(a)?;
    let scalar = OperatorSpec::scalar(a)?;
    let mut cells = Vec::new();
    for &gamma in gammas {
        for &t_sq in tsqs {
            if !(t_sq > 0.0 && t_sq.is_finite()) {
                return Err(PpaError::InvalidParameter {
                    name: "t_sq",
                    value: t_sq,
                });
            }
            let c = a / t_sq.sqrt();
            let cfg = RunConfig::constant(gamma, c, iters);
            for (op, spec, z0) in [
                (ExtremalOperator::Skew, &skew, &[0.6, -0.8][..]),
                (ExtremalOperator::Scalar, &scalar, &[1.0][..]),
            ] {
                let trace = run(spec, &cfg, z0)?;
                let t = a / c;
                let b = rate_bundle(gamma, t)?;
                let (formula, tol, asserted) = match op {
                    ExtremalOperator::Skew => {
                        (b.rho_u, SKEW_TOL, b.regime.bound_branch() == Regime::Upper)
                    }
                    ExtremalOperator::Scalar => {
                        (b.rho_l, SCALAR_TOL, b.regime.bound_branch() == Regime::Lower)
                    }
                };
                let max_dev = trace
                    .records
                    .iter()
                    .filter(|r| r.step_ratio_sq.is_finite())
                    .map(|r| (r.step_ratio_sq - formula).abs())
                    .fold(0.0, f64::max);
                let verdict = tightness_of(&trace).verdict;
                let passed = !asserted || (max_dev <= tol && verdict == Verdict::Attained);
                cells.push(ExampleCell {
                    operator: op,
                    gamma,
                    t_sq,
                    c,
                    regime: b.regime,
                    formula,
                    rho_opt: b.rho_opt,
                    max_dev,
                    asserted,
                    verdict,
                    passed,
                });
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_grids() {
        let g = default_gammas();
        assert_eq!(g.len(), 19);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[18], 1.9);
        assert_eq!(default_tsqs().len(), 8);
    }

    #[test]
    fn uniform_grids() {
        assert_eq!(gamma_grid(19, 2.0).unwrap(), default_gammas());
        assert_eq!(tsq_grid(5, 4.0).unwrap(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(gamma_grid(1, 2.0).is_err());
        assert!(gamma_grid(5, 2.5).is_err());
        assert!(tsq_grid(1, 4.0).is_err());
        assert!(tsq_grid(3, 0.0).is_err());
    }

    #[test]
    fn region_cells() {
        let cells = region_map(&[1.5, 0.5, 0.75], &[1.0, 0.25]).unwrap();
        let find = |g: f64, s: f64| cells.iter().find(|c| c.gamma == g && c.t_sq == s).unwrap();

        let c = find(1.5, 1.0);
        assert_eq!(c.regime, Regime::Upper);
        assert_eq!(c.gap, 0.0);

        let c = find(0.5, 0.25);
        assert_eq!(c.regime, Regime::Lower);
        assert_abs_diff_eq!(c.gap, 0.6 - 4.0 / 9.0, epsilon = 1e-15);

        let c = find(0.75, 0.25);
        assert_eq!(c.regime, Regime::Boundary);
        assert_abs_diff_eq!(c.rho_u, c.rho_l, epsilon = 1e-15);
    }

    #[test]
    fn default_sweep_passes() {
        let cells = examples_sweep(&default_gammas(), &default_tsqs(), 20).unwrap();
        assert_eq!(cells.len(), 2 * 19 * 8);
        assert!(cells.iter().all(|c| c.passed), "{:?}", cells.iter().find(|c| !c.passed));
        assert!(cells.iter().any(|c| c.operator == ExtremalOperator::Skew
            && c.asserted
            && c.gamma < 1.0));
    }

    #[test]
    fn scalar_outside_its_region_is_recorded_only() {
        let cells = examples_sweep(&[1.5], &[1.0], 20).unwrap();
        let sc = cells.iter().find(|c| c.operator == ExtremalOperator::Scalar).unwrap();
        assert!(!sc.asserted);
        assert_abs_diff_eq!(sc.formula, 0.0625, epsilon = 1e-15);
        assert!(sc.max_dev <= 1e-12);
        assert!(sc.formula < sc.rho_opt);
        assert_eq!(sc.verdict, Verdict::NotAttained);
    }
}
