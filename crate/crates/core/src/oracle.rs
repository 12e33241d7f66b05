//! Brute-force worst case of one relaxed proximal step.
//!
//! The squared ratio `‖(1−γ)u + γũ‖² / ‖u‖²` and both admissibility
//! constraints depend on `(u, ũ)` only through `‖u‖²`, `‖ũ‖²` and `⟨u, ũ⟩`.
//! Rotating so that `u` lies on the first axis and scaling to `‖u‖ = 1`
//! therefore loses nothing: every admissible pair is represented by
//! `ũ = (x, y)` in the plane with
//!
//! ```text
//! x² + y² ≤ t² ((1 − x)² + y²)     (Lipschitz)
//! x − x² − y² ≥ 0                  (monotone)
//! ```
//!
//! and the objective is `((1 − γ) + γx)² + (γy)²`. Everything is symmetric in
//! `y`, so only `y ≥ 0` is searched. The monotonicity disk confines the search
//! to `[0, 1] × [0, 1/2]`.
//!
//! Nothing here uses the closed-form factors; the search is meant to be
//! compared against them.

use serde::{Deserialize, Serialize};

use crate::error::{PpaError, Result};
use crate::rates::check_gamma;

/// Slack allowed on each constraint.
pub const FEASIBILITY_TOL: f64 = 1e-14;

/// Number of shrinking refinement passes after the coarse grid.
pub const REFINE_ROUNDS: usize = 10;

/// Points per axis in each refinement pass.
const REFINE_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasiblePoint {
    pub x: f64,
    pub y: f64,
}

impl FeasiblePoint {
    pub fn lipschitz_slack(&self, t: f64) -> f64 {
        let (x, y) = (self.x, self.y);
        t * t * ((1.0 - x) * (1.0 - x) + y * y) - (x * x + y * y)
    }

    pub fn monotone_slack(&self) -> f64 {
        let (x, y) = (self.x, self.y);
        x - x * x - y * y
    }

    pub fn is_feasible(&self, t: f64) -> bool {
        self.lipschitz_slack(t) >= -FEASIBILITY_TOL && self.monotone_slack() >= -FEASIBILITY_TOL
    }

    /// Squared one-step ratio with `u = (1, 0)`.
    pub fn ratio(&self, gamma: f64) -> f64 {
        let a = (1.0 - gamma) + gamma * self.x;
        let b = gamma * self.y;
        a * a + b * b
    }
}

/// Whether `ũ = (x, y)` is admissible for `u = (1, 0)` at ratio `t`.
pub fn feasibility(t: f64, x: f64, y: f64) -> bool {
    FeasiblePoint { x, y }.is_feasible(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub gamma: f64,
    pub t: f64,
    pub sup_ratio: f64,
    pub argmax: FeasiblePoint,
    /// Spacing of the coarse grid.
    pub grid_resolution: f64,
    /// Spacing of the last refinement pass.
    pub final_spacing: f64,
    /// Number of feasible points evaluated over all passes.
    pub feasible_points: usize,
}

type Box2 = ((f64, f64), (f64, f64));

struct Search {
    gamma: f64,
    t: f64,
    best: FeasiblePoint,
    best_ratio: f64,
    feasible: usize,
}

impl Search {
    fn points(bx: Box2, n: usize) -> impl Iterator<Item = FeasiblePoint> {
        let ((x0, x1), (y0, y1)) = bx;
        let hx = (x1 - x0) / (n - 1) as f64;
        let hy = (y1 - y0) / (n - 1) as f64;
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| FeasiblePoint {
                x: x0 + hx * i as f64,
                y: y0 + hy * j as f64,
            })
        })
    }

    /// Scans an `n × n` grid over `bx`. Ties keep the first point in
    /// row-major order, so the result depends on nothing but the grid.
    fn scan(&mut self, bx: Box2, n: usize) {
        for p in Self::points(bx, n) {
            if !p.is_feasible(self.t) {
                continue;
            }
            self.feasible += 1;
            let r = p.ratio(self.gamma);
            if r > self.best_ratio {
                self.best_ratio = r;
                self.best = p;
            }
        }
    }

    /// Bounding box of the feasible grid points whose ratio is within
    /// `2 (Lx hx + Ly hy)` of the incumbent, padded by two spacings and
    /// clipped to the search box. `Lx`, `Ly` bound the partial derivatives of
    /// the ratio on `bx`, so a grid neighbour of the true maximizer always
    /// qualifies.
    fn near_optimal_box(&self, bx: Box2, n: usize) -> Box2 {
        let ((x0, x1), (y0, y1)) = bx;
        let hx = (x1 - x0) / (n - 1) as f64;
        let hy = (y1 - y0) / (n - 1) as f64;
        let g = self.gamma;
        let lx = 2.0 * g * ((1.0 - g) + g * x0).abs().max(((1.0 - g) + g * x1).abs());
        let ly = 2.0 * g * g * y0.abs().max(y1.abs());
        let delta = 2.0 * (lx * hx + ly * hy);
        let pad = 2.0;
        let (mut lx, mut ux, mut ly, mut uy) = (self.best.x, self.best.x, self.best.y, self.best.y);
        for p in Self::points(bx, n) {
            if p.is_feasible(self.t) && p.ratio(self.gamma) >= self.best_ratio - delta {
                lx = lx.min(p.x);
                ux = ux.max(p.x);
                ly = ly.min(p.y);
                uy = uy.max(p.y);
            }
        }
        (
            ((lx - pad * hx).max(0.0), (ux + pad * hx).min(1.0)),
            ((ly - pad * hy).max(0.0), (uy + pad * hy).min(0.5)),
        )
    }
}

/// Largest squared one-step ratio over all admissible geometries.
///
/// A `resolution × resolution` grid over the search box is followed by
/// [`REFINE_ROUNDS`] passes, each over the near-optimal region of the
/// previous grid. Tracking the whole region rather than a neighbourhood of
/// the incumbent matters where the ratio is nearly flat along a constraint
/// boundary: there the coarse incumbent can sit far from the maximizer.
pub fn worst_case_ratio(gamma: f64, t: f64, resolution: usize) -> Result<OracleResult> {
    check_gamma(gamma)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(PpaError::InvalidParameter { name: "t", value: t });
    }
    if resolution < 100 {
        return Err(PpaError::InvalidParameter {
            name: "resolution",
            value: resolution as f64,
        });
    }

    // ũ = 0 is always admissible.
    let origin = FeasiblePoint { x: 0.0, y: 0.0 };
    let mut search = Search {
        gamma,
        t,
        best: origin,
        best_ratio: origin.ratio(gamma),
        feasible: 0,
    };
    let mut bx: Box2 = ((0.0, 1.0), (0.0, 0.5));
    let mut n = resolution;
    search.scan(bx, n);
    for _ in 0..REFINE_ROUNDS {
        bx = search.near_optimal_box(bx, n);
        n = REFINE_POINTS;
        search.scan(bx, n);
    }
    let ((x0, x1), (y0, y1)) = bx;
    let final_spacing = (x1 - x0).max(y1 - y0) / (n - 1) as f64;

    Ok(OracleResult {
        gamma,
        t,
        sup_ratio: search.best_ratio,
        argmax: search.best,
        grid_resolution: 1.0 / (resolution - 1) as f64,
        final_spacing,
        feasible_points: search.feasible,
    })
}
