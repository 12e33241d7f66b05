//! Engine and oracle properties across random operators and parameters.

use nalgebra::DMatrix;
use ppa_core::engine::run;
use ppa_core::oracle::worst_case_ratio;
use ppa_core::rates::{rho_lower, rho_opt, rho_upper};
use ppa_core::{OperatorSpec, Regime, RunConfig};
use proptest::prelude::*;

fn monotone_matrix(n: usize, b: &[f64], k: &[f64]) -> DMatrix<f64> {
    let b = DMatrix::from_row_slice(n, n, &b[..n * n]);
    let k = DMatrix::from_row_slice(n, n, &k[..n * n]);
    b.transpose() * &b + (&k - k.transpose())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dense_runs_respect_both_bounds(
        n in 1usize..=6,
        b in prop::collection::vec(-1.0f64..1.0, 36),
        k in prop::collection::vec(-1.0f64..1.0, 36),
        z0 in prop::collection::vec(-2.0f64..2.0, 6),
        gamma in 0.05f64..1.95,
        c in 0.1f64..10.0,
    ) {
        let Ok(spec) = OperatorSpec::dense(monotone_matrix(n, &b, &k)) else { return Ok(()); };
        let trace = run(&spec, &RunConfig::constant(gamma, c, 60), &z0[..n]).unwrap();
        prop_assert!(trace.max_dist_increase() <= 1e-12);
        prop_assert!(trace.max_bound_excess() <= 1e-10);
        for r in trace.records.iter().filter(|r| r.is_checked()) {
            prop_assert!(r.step_ratio_sq <= r.rho_ty + 1e-10);
        }
        // Averaged iterations have nonincreasing residuals.
        for w in trace.records.windows(2) {
            prop_assert!(w[1].residual <= w[0].residual * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn extremal_operators_attain_their_branch(
        gamma in 0.01f64..1.99,
        t in 0.01f64..5.0,
        a in 0.1f64..10.0,
    ) {
        let c = a / t;
        let cfg = RunConfig::constant(gamma, c, 10);
        match Regime::classify(gamma, t) {
            Regime::Lower => {
                let trace = run(&OperatorSpec::scalar(a).unwrap(), &cfg, &[1.5]).unwrap();
                let want = rho_lower(gamma, t).unwrap();
                for r in &trace.records {
                    prop_assert!((r.step_ratio_sq - want).abs() <= 1e-12);
                }
            }
            _ => {
                let trace = run(&OperatorSpec::skew(a).unwrap(), &cfg, &[0.3, -1.1]).unwrap();
                let want = rho_upper(gamma, t).unwrap();
                for r in &trace.records {
                    prop_assert!((r.step_ratio_sq - want).abs() <= 1e-10);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_is_sound_and_close(gamma in 0.05f64..1.95, t in 0.05f64..3.0) {
        let r = worst_case_ratio(gamma, t, 200).unwrap();
        let (rho, _) = rho_opt(gamma, t).unwrap();
        prop_assert!(r.sup_ratio <= rho + 1e-12);
        prop_assert!(rho - r.sup_ratio <= 5e-4);
        prop_assert!(r.argmax.is_feasible(t));
    }
}
