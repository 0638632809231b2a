//! Stationary solutions of the coupled map.
//!
//! At a coexistence point the private map forces `C - δx X* Y* = 1`, so the
//! product `X* Y* = (C - 1) / δx` is known. Substituting it into the state
//! map gives `Y* = A (C - δy (C - 1) / δx)` directly, and `X*` follows.

use crate::error::{Error, Result};
use crate::market_map::{step, MarketParams, MarketState, ReducedParams};

/// Closed-form denominators below this magnitude are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointKind {
    /// Both sellers present: `C - δx X* Y* = 1`.
    Coexistence,
    /// Private seller absent: `(0, A C)`.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub x_star: f64,
    pub y_star: f64,
    pub kind: FixedPointKind,
}

impl FixedPoint {
    pub fn state(&self) -> MarketState {
        MarketState::new(self.x_star, self.y_star)
    }

    /// False when the point does not describe a market with both volumes
    /// strictly positive.
    pub fn is_positive(&self) -> bool {
        self.x_star > 0.0 && self.y_star > 0.0
    }
}

/// The coexistence solution together with the positivity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coexistence {
    pub point: FixedPoint,
    /// Set when `c <= 1` or either coordinate is not strictly positive.
    pub no_positive_equilibrium: bool,
}

pub fn coexistence_fixed_point(reduced: &ReducedParams, a: f64) -> Result<Coexistence> {
    let product = (reduced.c - 1.0) / reduced.delta_x;
    let denominator = a * (reduced.c - product * reduced.delta_y);
    if denominator.abs() <= DEGENERACY_TOL {
        return Err(Error::DegenerateEquilibrium { denominator });
    }
    let y_star = denominator;
    let x_star = product / y_star;
    let point = FixedPoint {
        x_star,
        y_star,
        kind: FixedPointKind::Coexistence,
    };
    Ok(Coexistence {
        point,
        no_positive_equilibrium: reduced.c <= 1.0 || !point.is_positive(),
    })
}

pub fn trivial_fixed_point(reduced: &ReducedParams, a: f64) -> FixedPoint {
    FixedPoint {
        x_star: 0.0,
        y_star: a * reduced.c,
        kind: FixedPointKind::Trivial,
    }
}

/// `(C - Y*/A) / (C - 1)`; equals `δy / δx` at the coexistence point.
pub fn price_ratio_at_equilibrium(reduced: &ReducedParams, a: f64, y_star: f64) -> Result<f64> {
    let excess = reduced.c - 1.0;
    if excess.abs() <= DEGENERACY_TOL {
        return Err(Error::DivisionByZero("price ratio needs C != 1"));
    }
    Ok((reduced.c - y_star / a) / excess)
}

pub fn verify_fixed_point(params: &MarketParams, fp: &FixedPoint, tol: f64) -> bool {
    let next = step(params, fp.state());
    (next.x - fp.x_star).abs() <= tol && (next.y - fp.y_star).abs() <= tol
}
