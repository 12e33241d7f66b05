//! Linear maximal monotone operators with exact resolvents.
//!
//! All built-in operators have their unique zero at the origin. The
//! convergence analysis only involves `zᵏ − z*`, so shifting the zero would
//! not change any ratio.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PpaError, Result};
use crate::rates::check_positive;

/// Lipschitz modulus `a` of `T⁻¹` at the origin and the radius `tau` on which
/// it holds. `tau = ∞` means the property is global.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseModulus {
    pub a: f64,
    pub tau: f64,
}

impl InverseModulus {
    pub fn new(a: f64, tau: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(PpaError::InvalidParameter { name: "a", value: a });
        }
        check_positive("tau", tau)?;
        Ok(Self { a, tau })
    }

    pub fn global(a: f64) -> Result<Self> {
        Self::new(a, f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    /// `T(z) = A z` with `A + Aᵀ ⪰ 0` and `A` nonsingular.
    DenseLinear(DMatrix<f64>),
    /// `T(z) = (1/a) [[0, 1], [−1, 0]] z` on ℝ². Attains the upper-regime bound.
    SkewRotation(f64),
    /// `T(z) = z / a` on ℝ. Attains the lower-regime bound.
    ScalarLinear(f64),
}

/// A validated operator together with its inverse modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorConfig", into = "OperatorConfig")]
pub struct OperatorSpec {
    kind: OperatorKind,
    dimension: usize,
    modulus: f64,
}

/// Serialized form: `{"kind": "skew", "a": 1.0}`, `{"kind": "scalar", "a": 1.0}`
/// or `{"kind": "dense", "matrix": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OperatorConfig {
    Skew { a: f64 },
    Scalar { a: f64 },
    Dense { matrix: Vec<Vec<f64>> },
}

impl TryFrom<OperatorConfig> for OperatorSpec {
    type Error = PpaError;

    fn try_from(cfg: OperatorConfig) -> Result<Self> {
        match cfg {
            OperatorConfig::Skew { a } => OperatorSpec::skew(a),
            OperatorConfig::Scalar { a } => OperatorSpec::scalar(a),
            OperatorConfig::Dense { matrix } => {
                let n = matrix.len();
                if n == 0 || matrix.iter().any(|row| row.len() != n) {
                    return Err(PpaError::SingularOperator);
                }
                OperatorSpec::dense(DMatrix::from_fn(n, n, |i, j| matrix[i][j]))
            }
        }
    }
}

impl From<OperatorSpec> for OperatorConfig {
    fn from(spec: OperatorSpec) -> Self {
        match spec.kind {
            OperatorKind::SkewRotation(a) => OperatorConfig::Skew { a },
            OperatorKind::ScalarLinear(a) => OperatorConfig::Scalar { a },
            OperatorKind::DenseLinear(m) => OperatorConfig::Dense {
                matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
            },
        }
    }
}

fn check_modulus(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(PpaError::InvalidParameter { name: "a", value: a })
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(PpaError::DimensionMismatch { expected, got })
    }
}

impl OperatorSpec {
    pub fn skew(a: f64) -> Result<Self> {
        check_modulus(a)?;
        Ok(Self {
            kind: OperatorKind::SkewRotation(a),
            dimension: 2,
            modulus: a,
        })
    }

    pub fn scalar(a: f64) -> Result<Self> {
        check_modulus(a)?;
        Ok(Self {
            kind: OperatorKind::ScalarLinear(a),
            dimension: 1,
            modulus: a,
        })
    }

    /// Validates monotonicity (`A + Aᵀ ⪰ 0`) and nonsingularity, and sets the
    /// inverse modulus to `‖A⁻¹‖₂ = 1/σ_min(A)`.
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n || matrix.iter().any(|v| !v.is_finite()) {
            return Err(PpaError::SingularOperator);
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigenvalues().min();
        let scale = matrix.norm().max(1.0);
        if min_eig < -1e-12 * scale {
            return Err(PpaError::NotMonotone {
                min_eigenvalue: min_eig,
            });
        }
        let sv = matrix.singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        if smax == 0.0 || smin <= 1e-12 * smax {
            return Err(PpaError::SingularOperator);
        }
        Ok(Self {
            kind: OperatorKind::DenseLinear(matrix),
            dimension: n,
            modulus: 1.0 / smin,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| PpaError::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("operator config serializes")
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn inverse_modulus(&self) -> InverseModulus {
        InverseModulus {
            a: self.modulus,
            tau: f64::INFINITY,
        }
    }

    /// The unique zero, always the origin for built-in operators.
    pub fn zero(&self) -> Vec<f64> {
        vec![0.0; self.dimension]
    }

    /// `T(z)`.
    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dimension, z.len())?;
        Ok(match &self.kind {
            OperatorKind::SkewRotation(a) => vec![z[1] / a, -z[0] / a],
            OperatorKind::ScalarLinear(a) => vec![z[0] / a],
            OperatorKind::DenseLinear(m) => {
                (m * DVector::from_column_slice(z)).as_slice().to_vec()
            }
        })
    }

    /// `J_{cT}(z) = (I + cT)⁻¹ z`, solved exactly.
    pub fn resolvent(&self, c: f64, z: &[f64]) -> Result<Vec<f64>> {
        if !(c.is_finite() && c > 0.0) {
            return Err(PpaError::InvalidParameter { name: "c", value: c });
        }
        check_dim(self.dimension, z.len())?;
        match &self.kind {
            OperatorKind::SkewRotation(a) => {
                let s = a / (a * a + c * c);
                Ok(vec![s * (a * z[0] - c * z[1]), s * (c * z[0] + a * z[1])])
            }
            OperatorKind::ScalarLinear(a) => {
                let t = a / c;
                Ok(vec![t * z[0] / (t + 1.0)])
            }
            OperatorKind::DenseLinear(m) => {
                let n = self.dimension;
                let lhs = DMatrix::<f64>::identity(n, n) + m * c;
                lhs.lu()
                    .solve(&DVector::from_column_slice(z))
                    .map(|v| v.as_slice().to_vec())
                    .ok_or(PpaError::SingularResolvent { c })
            }
        }
    }

    /// `⟨x − y, T(x) − T(y)⟩`, nonnegative for a monotone operator.
    pub fn monotonicity_gap(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dimension, y.len())?;
        let tx = self.apply(x)?;
        let ty = self.apply(y)?;
        Ok(x.iter()
            .zip(y)
            .zip(tx.iter().zip(&ty))
            .map(|((xi, yi), (txi, tyi))| (xi - yi) * (txi - tyi))
            .sum())
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sub(u: &[f64], v: &[f64]) -> Vec<f64> {
        u.iter().zip(v).map(|(a, b)| a - b).collect()
    }

    fn backward_residual(spec: &OperatorSpec, c: f64, z: &[f64]) -> f64 {
        let zt = spec.resolvent(c, z).unwrap();
        let tz = spec.apply(&zt).unwrap();
        let r: Vec<f64> = zt.iter().zip(&tz).zip(z).map(|((a, b), zi)| a + c * b - zi).collect();
        norm(&r)
    }

    fn sample_dense() -> OperatorSpec {
        OperatorSpec::dense(DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 1.0, -0.5, -1.0, 0.5, 0.3, 0.5, -0.3, 1.0],
        ))
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(OperatorSpec::scalar(1.0).unwrap().apply(&[0.0]).unwrap(), vec![0.0]);
        assert_eq!(
            OperatorSpec::skew(1.0).unwrap().apply(&[1.0, 0.0]).unwrap(),
            vec![0.0, -1.0]
        );
        let id = OperatorSpec::dense(DMatrix::identity(2, 2)).unwrap();
        assert_eq!(id.apply(&[2.0, 3.0]).unwrap(), vec![2.0, 3.0]);
        assert_eq!(
            id.apply(&[1.0]),
            Err(PpaError::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn resolvent_examples() {
        let s = OperatorSpec::scalar(1.0).unwrap();
        assert_abs_diff_eq!(s.resolvent(4.0, &[1.0]).unwrap()[0], 0.2, epsilon = 1e-15);
        let r = OperatorSpec::skew(1.0).unwrap().resolvent(1.0, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(r[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 0.5, epsilon = 1e-15);
        for spec in [s, OperatorSpec::skew(2.0).unwrap(), sample_dense()] {
            let z = spec.zero();
            assert_eq!(spec.resolvent(0.7, &z).unwrap(), z);
        }
    }

    #[test]
    fn resolvent_rejects_bad_step() {
        let s = OperatorSpec::skew(1.0).unwrap();
        assert!(s.resolvent(0.0, &[1.0, 0.0]).is_err());
        assert!(s.resolvent(-1.0, &[1.0, 0.0]).is_err());
        assert!(s.resolvent(f64::NAN, &[1.0, 0.0]).is_err());
        assert!(s.resolvent(1.0, &[1.0]).is_err());
    }

    #[test]
    fn monotonicity_gap_examples() {
        let skew = OperatorSpec::skew(1.0).unwrap();
        assert_eq!(skew.monotonicity_gap(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        let sc = OperatorSpec::scalar(2.0).unwrap();
        assert_abs_diff_eq!(sc.monotonicity_gap(&[3.0], &[1.0]).unwrap(), 2.0, epsilon = 1e-15);
        let d = sample_dense();
        let x = [0.3, -1.0, 2.0];
        assert_eq!(d.monotonicity_gap(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn construction_validates() {
        assert!(OperatorSpec::skew(0.0).is_err());
        assert!(OperatorSpec::scalar(-1.0).is_err());
        assert!(OperatorSpec::scalar(f64::INFINITY).is_err());
        // -I is not monotone
        assert!(matches!(
            OperatorSpec::dense(-DMatrix::<f64>::identity(2, 2)),
            Err(PpaError::NotMonotone { .. })
        ));
        // PSD but singular
        assert_eq!(
            OperatorSpec::dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])),
            Err(PpaError::SingularOperator)
        );
        assert_eq!(
            OperatorSpec::dense(DMatrix::zeros(2, 3)),
            Err(PpaError::SingularOperator)
        );
        // pure skew is monotone and nonsingular
        let k = OperatorSpec::dense(DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0])).unwrap();
        assert_abs_diff_eq!(k.inverse_modulus().a, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn inverse_modulus() {
        assert_eq!(OperatorSpec::skew(3.0).unwrap().inverse_modulus().a, 3.0);
        assert!(OperatorSpec::scalar(3.0).unwrap().inverse_modulus().tau.is_infinite());
        let d = OperatorSpec::dense(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 0.5])))
            .unwrap();
        assert_abs_diff_eq!(d.inverse_modulus().a, 2.0, epsilon = 1e-14);
        assert!(InverseModulus::new(-1.0, 1.0).is_err());
        assert!(InverseModulus::new(1.0, 0.0).is_err());
        assert!(InverseModulus::global(0.0).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = OperatorSpec::from_json(r#"{"kind": "skew", "a": 1.5}"#).unwrap();
        assert_eq!(s, OperatorSpec::skew(1.5).unwrap());
        let s = OperatorSpec::from_json(r#"{"kind": "scalar", "a": 2.0}"#).unwrap();
        assert_eq!(s, OperatorSpec::scalar(2.0).unwrap());
        let d = OperatorSpec::from_json(r#"{"kind": "dense", "matrix": [[1, 2], [-2, 1]]}"#)
            .unwrap();
        assert_eq!(d.apply(&[1.0, 0.0]).unwrap(), vec![1.0, -2.0]);
        assert_eq!(OperatorSpec::from_json(&d.to_json()).unwrap(), d);
        assert!(OperatorSpec::from_json(r#"{"kind": "skew", "a": -1}"#).is_err());
        assert!(OperatorSpec::from_json(r#"{"kind": "dense", "matrix": [[1, 2]]}"#).is_err());
        assert!(OperatorSpec::from_json(r#"{"kind": "cubic"}"#).is_err());
    }

    #[test]
    fn skew_inverse_lipschitz_is_tight() {
        // ‖ũ‖² = a²/(a²+c²)‖u‖², i.e. ‖z̃‖ = a‖(z − z̃)/c‖ exactly.
        let (a, c) = (1.3, 0.6);
        let s = OperatorSpec::skew(a).unwrap();
        let z = [0.8, -2.1];
        let zt = s.resolvent(c, &z).unwrap();
        let lhs = norm(&zt);
        assert_abs_diff_eq!(lhs * lhs, a * a / (a * a + c * c) * norm(&z).powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(lhs, a * norm(&sub(&z, &zt)) / c, epsilon = 1e-14);
    }

    #[test]
    fn scalar_inverse_lipschitz_is_tight() {
        let (a, c) = (0.4, 1.7);
        let s = OperatorSpec::scalar(a).unwrap();
        let z = [3.0];
        let zt = s.resolvent(c, &z).unwrap();
        let t = a / c;
        assert_abs_diff_eq!(zt[0], t / (t + 1.0) * z[0], epsilon = 1e-15);
        assert_abs_diff_eq!(zt[0].abs(), t * (z[0] - zt[0]).abs(), epsilon = 1e-14);
    }

    fn spec_strategy() -> impl Strategy<Value = OperatorSpec> {
        prop_oneof![
            (0.01f64..10.0).prop_map(|a| OperatorSpec::skew(a).unwrap()),
            (0.01f64..10.0).prop_map(|a| OperatorSpec::scalar(a).unwrap()),
            Just(sample_dense()),
        ]
    }

    fn vec_pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn resolvent_is_nonexpansive(
            (spec, (z, w), c) in spec_strategy()
                .prop_flat_map(|s| { let n = s.dimension(); (Just(s), vec_pair(n), 0.01f64..50.0) })
        ) {
            let rz = spec.resolvent(c, &z).unwrap();
            let rw = spec.resolvent(c, &w).unwrap();
            prop_assert!(norm(&sub(&rz, &rw)) <= norm(&sub(&z, &w)) + 1e-10);
        }

        #[test]
        fn resolvent_backward_residual(
            (spec, (z, _), c) in spec_strategy()
                .prop_flat_map(|s| { let n = s.dimension(); (Just(s), vec_pair(n), 0.01f64..50.0) })
        ) {
            prop_assert!(backward_residual(&spec, c, &z) <= 1e-12 * (1.0 + norm(&z)));
        }

        #[test]
        fn monotonicity_gap_nonnegative(
            (spec, (x, y)) in spec_strategy()
                .prop_flat_map(|s| { let n = s.dimension(); (Just(s), vec_pair(n)) })
        ) {
            let g = spec.monotonicity_gap(&x, &y).unwrap();
            prop_assert!(g >= -1e-12 * norm(&sub(&x, &y)).powi(2));
        }
    }
}
