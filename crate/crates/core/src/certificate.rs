//! Algebraic certificate behind the one-step bound.
//!
//! With `u = zᵏ − z*`, `ũ = z̃ᵏ − z*` and `u⁺ = (1 − γ)u + γũ`, the two facts
//! available about a step are
//!
//! ```text
//! ‖ũ‖ ≤ t ‖u − ũ‖        (T⁻¹ Lipschitz at 0)
//! ⟨u − ũ, ũ⟩ ≥ 0         (monotonicity)
//! ```
//!
//! The bound follows by adding nonnegative multiples of these to `‖u⁺‖²`:
//!
//! * upper regime (`t² + γ ≥ 1`): multipliers `μ` and `ν` turn the sum into
//!   exactly `ρ_u ‖u‖²`;
//! * lower regime (`t² + γ < 1`): a single multiplier `λ` leaves
//!   `ρ_l ‖u‖²` plus a negative multiple of a perfect square,
//!   `γ(t²+γ−1) ‖(√t/(t+1)) u − ũ/√t‖²`.
//!
//! The first lower-regime coefficient is `γ(t²+γ−1) · t/(t+1)²`, not
//! `· t/(t²+1)`; the latter is off by `2γt²(1−γ−t²)/((t+1)²(t²+1))`
//! (see [`c11_residual_tsq_denominator`]).
//!
//! [`identity_upper`] and [`identity_lower`] report how far the coefficient
//! identities are from holding. They are evaluated in double-double
//! arithmetic: near `t → 0` the terms carry `1/t` and plain `f64` would lose
//! about `log10(1/t)` digits to cancellation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{PpaError, Result};
use crate::operators::{dot, norm};
use crate::rates::{check_gamma, check_t, rho_lower, rho_upper, Regime};

/// Default absolute tolerance for identity residuals, scaled by `1 + |γ| + t²`.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Lower-regime sweeps stay above this `t`; `λ` has a genuine `1/t` pole.
pub const MIN_LOWER_T: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub gamma: f64,
    pub t: f64,
    pub mu: f64,
    pub nu: f64,
    pub lambda: f64,
    pub regime: Regime,
}

impl Multipliers {
    /// Whether the multipliers used by the binding branch have the signs the
    /// argument needs: `μ ≥ 0, 0 < ν < 1` above the line, `λ > 0, 0 < ρ_l < 1`
    /// below it.
    pub fn feasible(&self) -> bool {
        match self.regime.bound_branch() {
            Regime::Upper => {
                let mu_floor = -IDENTITY_TOL * (1.0 + self.t * self.t);
                self.mu >= mu_floor && self.nu > 0.0 && self.nu < 1.0
            }
            _ => {
                let rho_l = rho_lower(self.gamma, self.t).unwrap_or(f64::NAN);
                self.lambda > 0.0 && rho_l > 0.0 && rho_l < 1.0
            }
        }
    }
}

/// `μ = 2γ(t²+γ−1)/(t²+1)`, `ν = γ(2−γ)/(t²+1)`, `λ = γ(1−γ)/t + γ²/(t+1)`.
///
/// Requires `t > 0`; at `t = 0` the certificate is not applicable.
pub fn multipliers(gamma: f64, t: f64) -> Result<Multipliers> {
    check_gamma(gamma)?;
    check_t(t)?;
    if t == 0.0 {
        return Err(PpaError::NotApplicable("certificate multipliers need t > 0"));
    }
    let s = t * t + 1.0;
    Ok(Multipliers {
        gamma,
        t,
        mu: 2.0 * gamma * (t * t + gamma - 1.0) / s,
        nu: gamma * (2.0 - gamma) / s,
        lambda: gamma * (1.0 - gamma) / t + gamma * gamma / (t + 1.0),
        regime: Regime::classify(gamma, t),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub c11: f64,
    pub c12: f64,
    pub c22: f64,
    pub max_abs: f64,
}

impl IdentityResidual {
    fn new(c11: f64, c12: f64, c22: f64) -> Self {
        Self {
            c11,
            c12,
            c22,
            max_abs: c11.abs().max(c12.abs()).max(c22.abs()),
        }
    }

    pub fn tolerance(gamma: f64, t: f64) -> f64 {
        IDENTITY_TOL * (1.0 + gamma.abs() + t * t)
    }

    pub fn within_tolerance(&self, gamma: f64, t: f64) -> bool {
        self.max_abs <= Self::tolerance(gamma, t)
    }
}

/// Residuals of the upper-regime coefficient identities
///
/// ```text
/// (1−γ)² + νt²            = ρ_u
/// γ(1−γ) + μ/2 − t²ν      = 0
/// γ² − μ + (t²−1)ν        = 0
/// ```
///
/// The identities are pure algebra and hold for every `t ≥ 0`.
pub fn identity_upper(gamma: f64, t: f64) -> Result<IdentityResidual> {
    check_gamma(gamma)?;
    check_t(t)?;
    let one = Dd::ONE;
    let (g, t) = (Dd::from(gamma), Dd::from(t));
    let t2 = t.sqr();
    let s = t2 + one;
    let mu = Dd::from(2.0) * g * (t2 + g - one) / s;
    let nu = g * (Dd::from(2.0) - g) / s;
    let rho_u = one - g * (Dd::from(2.0) - g) / s;

    let c11 = (one - g).sqr() + nu * t2 - rho_u;
    let c12 = g * (one - g) + mu / Dd::from(2.0) - t2 * nu;
    let c22 = g.sqr() - mu + (t2 - one) * nu;
    Ok(IdentityResidual::new(c11.to_f64(), c12.to_f64(), c22.to_f64()))
}

/// Residuals of the lower-regime coefficient identities
///
/// ```text
/// (1−γ)² + λt² − ρ_l  = γ(t²+γ−1) · t/(t+1)²
/// γ(1−γ) − λt²        = γ(t²+γ−1) · (−1/(t+1))
/// γ² + λ(t²−1)        = γ(t²+γ−1) · (1/t)
/// ```
///
/// Also pure algebra, valid for every `t > 0`.
pub fn identity_lower(gamma: f64, t: f64) -> Result<IdentityResidual> {
    check_gamma(gamma)?;
    check_t(t)?;
    if t == 0.0 {
        return Err(PpaError::NotApplicable("lower identities need t > 0"));
    }
    let one = Dd::ONE;
    let (g, t) = (Dd::from(gamma), Dd::from(t));
    let t2 = t.sqr();
    let lambda = g * (one - g) / t + g.sqr() / (t + one);
    let rho_l = (one - g / (t + one)).sqr();
    let factor = g * (t2 + g - one);

    let c11 = (one - g).sqr() + lambda * t2 - rho_l - factor * t / (t + one).sqr();
    let c12 = g * (one - g) - lambda * t2 + factor / (t + one);
    let c22 = g.sqr() + lambda * (t2 - one) - factor / t;
    Ok(IdentityResidual::new(c11.to_f64(), c12.to_f64(), c22.to_f64()))
}

/// How far `(1−γ)² + λt² − ρ_l` is from `γ(t²+γ−1) · t/(t²+1)`, the
/// first-coefficient identity with the denominator written as `t² + 1`.
/// Nonzero off the boundary line, which is why [`identity_lower`] uses
/// `(t + 1)²`.
pub fn c11_residual_tsq_denominator(gamma: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(PpaError::InvalidParameter { name: "t", value: t });
    }
    let one = Dd::ONE;
    let (g, t) = (Dd::from(gamma), Dd::from(t));
    let t2 = t.sqr();
    let lambda = g * (one - g) / t + g.sqr() / (t + one);
    let rho_l = (one - g / (t + one)).sqr();
    let factor = g * (t2 + g - one);
    Ok(((one - g).sqr() + lambda * t2 - rho_l - factor * t / (t2 + one)).to_f64())
}

/// `γ(t²+γ−1) · ‖(√t/(t+1)) u − (1/√t) ũ‖²`, the completed square left over in
/// the lower regime. Nonpositive whenever `t² + γ < 1`.
pub fn sos_decomposition_check(gamma: f64, t: f64, u: &[f64], utilde: &[f64]) -> Result<f64> {
    check_gamma(gamma)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(PpaError::InvalidParameter { name: "t", value: t });
    }
    if u.len() != utilde.len() {
        return Err(PpaError::DimensionMismatch {
            expected: u.len(),
            got: utilde.len(),
        });
    }
    let (a, b) = (t.sqrt() / (t + 1.0), 1.0 / t.sqrt());
    let sq: f64 = u
        .iter()
        .zip(utilde)
        .map(|(ui, vi)| (a * ui - b * vi).powi(2))
        .sum();
    Ok(gamma * (t * t + gamma - 1.0) * sq)
}

/// The successive quantities of the bounding argument evaluated at a
/// concrete pair `(u, ũ)`. For an admissible pair each stage is at most the
/// next one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub branch: Regime,
    /// `‖(1−γ)u + γũ‖²`
    pub lhs: f64,
    /// `lhs` plus the multiplier-weighted constraint slacks.
    pub penalized: f64,
    /// The same quantity written as a quadratic form in `(u, ũ)`.
    pub expanded: f64,
    /// `ρ ‖u‖²`
    pub bound: f64,
}

impl ChainCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.penalized + tol
            && (self.penalized - self.expanded).abs() <= tol
            && self.expanded <= self.bound + tol
    }
}

/// Evaluates the bounding argument stage by stage for one pair `(u, ũ)`.
pub fn verify_chain(gamma: f64, t: f64, u: &[f64], utilde: &[f64]) -> Result<ChainCheck> {
    let m = multipliers(gamma, t)?;
    if u.len() != utilde.len() {
        return Err(PpaError::DimensionMismatch {
            expected: u.len(),
            got: utilde.len(),
        });
    }
    let next: Vec<f64> = u
        .iter()
        .zip(utilde)
        .map(|(a, b)| (1.0 - gamma) * a + gamma * b)
        .collect();
    let diff: Vec<f64> = u.iter().zip(utilde).map(|(a, b)| a - b).collect();
    let uu = dot(u, u);
    let uv = dot(u, utilde);
    let vv = dot(utilde, utilde);
    let lhs = norm(&next).powi(2);
    let mono = dot(&diff, utilde);
    let lip = t * t * dot(&diff, &diff) - vv;
    let g = gamma;
    let t2 = t * t;

    let check = match m.regime.bound_branch() {
        Regime::Upper => {
            let c11 = (1.0 - g).powi(2) + m.nu * t2;
            let c12 = g * (1.0 - g) + m.mu / 2.0 - t2 * m.nu;
            let c22 = g * g - m.mu + (t2 - 1.0) * m.nu;
            let expanded = c11 * uu + 2.0 * c12 * uv + c22 * vv;
            ChainCheck {
                branch: Regime::Upper,
                lhs,
                penalized: lhs + m.mu * mono + m.nu * lip,
                expanded,
                bound: rho_upper(g, t)? * uu,
            }
        }
        _ => {
            let rho_l = rho_lower(g, t)?;
            let f = g * (t2 + g - 1.0);
            let cross = -2.0 / (t + 1.0) * uv + vv / t;
            ChainCheck {
                branch: Regime::Lower,
                lhs,
                penalized: lhs + m.lambda * lip,
                expanded: f * (t / (t + 1.0).powi(2) * uu + cross) + rho_l * uu,
                bound: rho_l * uu,
            }
        }
    };
    Ok(check)
}

/// Summary of a randomized certificate sweep, as emitted by `ppa certify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub region: String,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "max_residual_eq8")]
    pub max_residual_upper: f64,
    #[serde(rename = "max_residual_eq9")]
    pub max_residual_lower: f64,
    pub identities: String,
    pub multiplier_feasibility: String,
}

impl CertifyReport {
    pub fn passed(&self) -> bool {
        self.identities == "pass" && self.multiplier_feasibility == "pass"
    }
}

/// Upper-region sample: `γ ∈ (0, 2)`, `t ≥ √max(0, 1−γ)` with `t` up to about 1e3.
pub fn sample_upper(rng: &mut impl Rng) -> (f64, f64) {
    loop {
        let gamma: f64 = rng.random_range(0.0..2.0);
        if gamma <= 0.0 {
            continue;
        }
        let t_lo = (1.0 - gamma).max(0.0).sqrt();
        let t = t_lo + 10f64.powf(rng.random_range(-6.0..3.0));
        if Regime::classify(gamma, t) != Regime::Lower {
            return (gamma, t);
        }
    }
}

/// Lower-region sample: `γ ∈ (0, 1)`, `t ∈ [1e−6, √(1−γ))`, log-uniform in `t`.
pub fn sample_lower(rng: &mut impl Rng) -> (f64, f64) {
    loop {
        let gamma: f64 = rng.random_range(0.0..1.0);
        if gamma <= 0.0 || 1.0 - gamma <= MIN_LOWER_T * MIN_LOWER_T {
            continue;
        }
        let hi = (1.0 - gamma).sqrt().log10();
        let lo = MIN_LOWER_T.log10();
        if hi <= lo {
            continue;
        }
        let t = 10f64.powf(rng.random_range(lo..hi));
        if t >= MIN_LOWER_T && Regime::classify(gamma, t) == Regime::Lower {
            return (gamma, t);
        }
    }
}

/// Checks both identity families and multiplier feasibility on `samples`
/// random points of each region.
pub fn certify_sweep(samples: usize, seed: u64) -> CertifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max8 = 0.0f64;
    let mut max9 = 0.0f64;
    let mut identities_ok = true;
    let mut feasible_ok = true;

    for _ in 0..samples {
        let (g, t) = sample_upper(&mut rng);
        let r = identity_upper(g, t).expect("sampled parameters are valid");
        max8 = max8.max(r.max_abs);
        identities_ok &= r.within_tolerance(g, t);
        feasible_ok &= multipliers(g, t).map(|m| m.feasible()).unwrap_or(false);

        let (g, t) = sample_lower(&mut rng);
        let r = identity_lower(g, t).expect("sampled parameters are valid");
        max9 = max9.max(r.max_abs);
        identities_ok &= r.within_tolerance(g, t);
        feasible_ok &= multipliers(g, t).map(|m| m.feasible()).unwrap_or(false);
    }

    let verdict = |ok: bool| if ok { "pass" } else { "fail" }.to_string();
    CertifyReport {
        region: format!(
            "upper: gamma in (0,2), t^2+gamma >= 1, t <= 1e3; lower: gamma in (0,1), t^2+gamma < 1, t >= {MIN_LOWER_T:e}"
        ),
        samples,
        seed,
        max_residual_upper: max8,
        max_residual_lower: max9,
        identities: verdict(identities_ok),
        multiplier_feasibility: verdict(feasible_ok),
    }
}
