//! Relaxed proximal point iteration for maximal monotone inclusions.
//!
//! The crate is organised around the one-step linear convergence analysis of
//!
//! ```text
//! z̃ᵏ   = J_{cₖT}(zᵏ)
//! zᵏ⁺¹ = (1 − γ) zᵏ + γ z̃ᵏ,      γ ∈ (0, 2)
//! ```
//!
//! under the assumption that `T⁻¹` is Lipschitz at the origin with modulus `a`.
//! With `t = a / c` the squared contraction factor is
//!
//! ```text
//! ρ(γ, t) = 1 − γ(2 − γ)/(t² + 1)     if t² + γ ≥ 1
//!         = (1 − γ/(t + 1))²          otherwise
//! ```
//!
//! and both branches are attained by linear operators.
//!
//! * [`operators`]: linear maximal monotone operators with exact resolvents.
//! * [`rates`]: closed-form contraction factors, regime split, iteration threshold.
//! * [`certificate`]: multipliers and algebraic identities behind the bound.
//! * [`oracle`]: brute-force search of the worst one-step contraction.
//! * [`engine`]: the iteration itself, traces and tightness reports.
//! * [`grid`]: parameter grids used for region maps and example sweeps.

pub mod certificate;
mod dd;
pub mod engine;
mod error;
pub mod grid;
pub mod operators;
pub mod oracle;
pub mod rates;

pub use certificate::{IdentityResidual, Multipliers};
pub use engine::{CSchedule, RunConfig, StepRecord, Trace};
pub use error::{PpaError, Result};
pub use operators::{InverseModulus, OperatorKind, OperatorSpec};
pub use oracle::{FeasiblePoint, OracleResult};
pub use rates::{RateBundle, Regime, StepParams};
