//! Closed-form one-step contraction factors for the relaxed proximal point
//! iteration.
//!
//! Every function takes the relaxation factor `gamma ∈ (0, 2)` and the ratio
//! `t = a / c ≥ 0`, where `a` is the Lipschitz modulus of `T⁻¹` at the origin
//! and `c` the proximal parameter of the step. All returned values bound the
//! squared distance ratio `‖zᵏ⁺¹ − z*‖² / ‖zᵏ − z*‖²`.

use serde::{Deserialize, Serialize};

use crate::error::{PpaError, Result};

/// Half-width of the band around `t² + γ = 1` classified as [`Regime::Boundary`].
pub const BOUNDARY_TOL: f64 = 1e-14;

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 && gamma < 2.0 {
        Ok(())
    } else {
        Err(PpaError::InvalidRelaxation(gamma))
    }
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(PpaError::InvalidParameter { name: "t", value: t })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && !value.is_nan() {
        Ok(())
    } else {
        Err(PpaError::InvalidParameter { name, value })
    }
}

/// Per-step parameters. The ratio `t = a / c` is always derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    gamma: f64,
    c: f64,
    a: f64,
}

impl StepParams {
    pub fn new(gamma: f64, a: f64, c: f64) -> Result<Self> {
        check_gamma(gamma)?;
        check_positive("c", c)?;
        if !c.is_finite() {
            return Err(PpaError::InvalidParameter { name: "c", value: c });
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(PpaError::InvalidParameter { name: "a", value: a });
        }
        Ok(Self { gamma, c, a })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn t(&self) -> f64 {
        self.a / self.c
    }

    pub fn bundle(&self) -> RateBundle {
        // Both inputs were validated in `new`.
        rate_bundle(self.gamma, self.t()).expect("validated step parameters")
    }
}

/// Side of the line `t² + γ = 1` a parameter pair falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Upper,
    Lower,
    Boundary,
}

impl Regime {
    pub fn classify(gamma: f64, t: f64) -> Regime {
        let d = t * t + gamma - 1.0;
        if d > BOUNDARY_TOL {
            Regime::Upper
        } else if d < -BOUNDARY_TOL {
            Regime::Lower
        } else {
            Regime::Boundary
        }
    }

    /// The branch whose formula is the binding bound. The boundary belongs to
    /// the closed upper half-plane.
    pub fn bound_branch(self) -> Regime {
        match self {
            Regime::Boundary => Regime::Upper,
            r => r,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Upper => "upper",
            Regime::Lower => "lower",
            Regime::Boundary => "boundary",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// All bound values at one `(γ, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBundle {
    pub gamma: f64,
    pub t: f64,
    pub rho_u: f64,
    pub rho_l: f64,
    pub rho_opt: f64,
    pub rho_ty: f64,
    pub regime: Regime,
}

impl RateBundle {
    pub fn gap(&self) -> f64 {
        self.rho_ty - self.rho_opt
    }
}

/// `1 − γ(2 − γ)/(t² + 1)`, binding when `t² + γ ≥ 1`.
pub fn rho_upper(gamma: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_t(t)?;
    Ok(1.0 - gamma * (2.0 - gamma) / (t * t + 1.0))
}

/// `(1 − γ/(t + 1))²`, binding when `t² + γ < 1`.
pub fn rho_lower(gamma: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_t(t)?;
    let r = 1.0 - gamma / (t + 1.0);
    Ok(r * r)
}

/// The tight factor `max(ρ_u, ρ_l)` together with its regime.
///
/// Evaluated as the branch the regime selects, so rounding in the other
/// formula cannot leak in where the two meet.
pub fn rho_opt(gamma: f64, t: f64) -> Result<(f64, Regime)> {
    let regime = Regime::classify(gamma, t);
    let rho = match regime.bound_branch() {
        Regime::Lower => rho_lower(gamma, t)?,
        _ => rho_upper(gamma, t)?,
    };
    Ok((rho, regime))
}

/// The earlier bound `1 − min(γ, 2γ − γ²)/(t² + 1)`.
pub fn rho_ty(gamma: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_t(t)?;
    // Same expression as in `rho_upper`, so the two agree bit for bit on γ ≥ 1.
    let m = gamma.min(gamma * (2.0 - gamma));
    Ok(1.0 - m / (t * t + 1.0))
}

/// `ρ_TY − ρ_opt`; zero for `γ ∈ [1, 2)`, strictly positive for `γ ∈ (0, 1)`, `t > 0`.
pub fn bound_gap(gamma: f64, t: f64) -> Result<f64> {
    Ok(rho_ty(gamma, t)? - rho_opt(gamma, t)?.0)
}

pub fn rate_bundle(gamma: f64, t: f64) -> Result<RateBundle> {
    let rho_u = rho_upper(gamma, t)?;
    let rho_l = rho_lower(gamma, t)?;
    Ok(RateBundle {
        gamma,
        t,
        rho_u,
        rho_l,
        rho_opt: rho_opt(gamma, t)?.0,
        rho_ty: rho_ty(gamma, t)?,
        regime: Regime::classify(gamma, t),
    })
}

/// Iteration index beyond which the scaled residual `‖zᵏ − z̃ᵏ‖/c` is
/// guaranteed to be at most `tau` for a constant proximal parameter `c`:
/// `‖z⁰ − z*‖² / (γ(2 − γ) τ² c²)`.
///
/// `tau = ∞` is accepted and yields zero.
pub fn khat(z0_dist: f64, gamma: f64, tau: f64, c: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(z0_dist.is_finite() && z0_dist >= 0.0) {
        return Err(PpaError::InvalidParameter {
            name: "z0_dist",
            value: z0_dist,
        });
    }
    check_positive("tau", tau)?;
    check_positive("c", c)?;
    if !c.is_finite() {
        return Err(PpaError::InvalidParameter { name: "c", value: c });
    }
    if z0_dist == 0.0 || tau.is_infinite() {
        return Ok(0.0);
    }
    Ok(z0_dist * z0_dist / (gamma * (2.0 - gamma) * tau * tau * c * c))
}

/// Product of the per-step factors `ρ_opt(γ, tₖ)` over a schedule.
///
/// Informational only: it bounds `‖zᴺ − z*‖² / ‖z⁰ − z*‖²` when every step is
/// inside the regularity window, but makes no tightness claim.
pub fn aggregate_bound(gamma: f64, ts: &[f64]) -> Result<f64> {
    ts.iter()
        .try_fold(1.0, |acc, &t| Ok(acc * rho_opt(gamma, t)?.0))
}
