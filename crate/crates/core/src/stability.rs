//! Stability of the coexistence point.
//!
//! The per-seller conditions freeze the other seller's volume at its
//! stationary value and ask whether the remaining one-dimensional map
//! contracts:
//!
//! * private seller: `1 < C < 3`, from the slope `2 - C` of the private map;
//! * state seller: `0 < C < 1 / (1 - βx / (2 βy))`, from the slope
//!   `-A δy X*` of the affine state map;
//! * coexistence: both of the above together with `βx <= 4/3 βy`, which is
//!   where the state bound reaches 3.
//!
//! The full two-dimensional Jacobian is reported alongside. The two notions
//! are not equivalent: the coupled map can flip into a 2-cycle while both
//! frozen-axis maps still contract.

use crate::equilibrium::{coexistence_fixed_point, trivial_fixed_point, FixedPoint};
use crate::market_map::{step, MarketParams, MarketState, ReducedParams};

/// Width of the equality band that counts as marginal.
pub const MARGINAL_TOL: f64 = 1e-12;

/// Largest private/state price ratio that keeps the state bound at or below 3.
pub const PRICE_RATIO_BOUND: f64 = 4.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
    NotApplicable,
}

impl Stability {
    pub fn name(&self) -> &'static str {
        match self {
            Stability::Stable => "Stable",
            Stability::Marginal => "Marginal",
            Stability::Unstable => "Unstable",
            Stability::NotApplicable => "NotApplicable",
        }
    }
}

/// A verdict plus the signed distance (in units of `C`) to the nearest
/// bound. Positive margins mean every strict inequality holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub value: Stability,
    pub margin: f64,
}

impl Classification {
    /// Classifies from the slacks of a set of strict inequalities.
    fn from_slacks(slacks: &[f64]) -> Self {
        let margin = slacks.iter().copied().fold(f64::INFINITY, f64::min);
        let value = if margin < -MARGINAL_TOL {
            Stability::Unstable
        } else if margin <= MARGINAL_TOL {
            Stability::Marginal
        } else {
            Stability::Stable
        };
        Self { value, margin }
    }

    pub fn is_stable(&self) -> bool {
        self.value == Stability::Stable
    }
}

/// `1 - βx / (2 βy)`, the denominator of the state-seller bound.
fn state_bound_denominator(beta_x: f64, beta_y: f64) -> f64 {
    1.0 - 0.5 * beta_x / beta_y
}

/// Upper bound on `C` for the state seller, or `None` when
/// `βx >= 2 βy` and the inequality holds for every positive `C`.
pub fn state_upper_bound(beta_x: f64, beta_y: f64) -> Option<f64> {
    let d = state_bound_denominator(beta_x, beta_y);
    (d > MARGINAL_TOL).then(|| 1.0 / d)
}

pub fn private_stability(reduced: &ReducedParams) -> Classification {
    Classification::from_slacks(&[reduced.c - 1.0, 3.0 - reduced.c])
}

pub fn state_stability(reduced: &ReducedParams, beta_x: f64, beta_y: f64) -> Classification {
    match state_upper_bound(beta_x, beta_y) {
        Some(bound) => Classification::from_slacks(&[reduced.c, bound - reduced.c]),
        // 2 (βy/βx) (C - 1) < C holds for all C > 0 once βy/βx <= 1/2.
        None => Classification::from_slacks(&[reduced.c]),
    }
}

pub fn price_bound_check(beta_x: f64, beta_y: f64) -> bool {
    beta_x <= PRICE_RATIO_BOUND * beta_y + MARGINAL_TOL
}

pub fn coexistence_condition(reduced: &ReducedParams, beta_x: f64, beta_y: f64) -> Classification {
    let bound = state_upper_bound(beta_x, beta_y);
    if !price_bound_check(beta_x, beta_y) {
        let overshoot = bound.map_or(f64::NEG_INFINITY, |b| 3.0 - b);
        return Classification {
            value: Stability::Unstable,
            margin: overshoot.min(-MARGINAL_TOL),
        };
    }
    // Price bound holding implies a finite state bound no larger than 3.
    let bound = bound.expect("finite state bound under the price bound");
    Classification::from_slacks(&[reduced.c - 1.0, bound - reduced.c])
}

/// A 2x2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[f64; 2]; 2]);

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Matrix2 = Matrix2([[0.0; 2]; 2]);

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn determinant(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }
}

/// Partial derivatives of the coupled map at `s`.
pub fn jacobian(reduced: &ReducedParams, a: f64, s: MarketState) -> Matrix2 {
    let ReducedParams { c, delta_x, delta_y } = *reduced;
    Matrix2([
        [c - 2.0 * delta_x * s.x * s.y, -delta_x * s.x * s.x],
        [-a * delta_y * s.y, -a * delta_y * s.x],
    ])
}

/// Largest eigenvalue modulus, from the characteristic polynomial
/// `λ² - tr λ + det`.
pub fn spectral_radius(m: &Matrix2) -> f64 {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        // complex pair, |λ|² = det
        return det.sqrt();
    }
    let root = disc.sqrt();
    // avoid cancellation in the smaller root
    let big = 0.5 * (tr + tr.signum() * root);
    if big == 0.0 {
        return 0.0;
    }
    let small = det / big;
    big.abs().max(small.abs())
}

/// Perturbs both coordinates by `perturbation` and checks that after `n`
/// steps the orbit sits within `perturbation / 10` of `fp`.
pub fn empirical_stability(
    params: &MarketParams,
    fp: &FixedPoint,
    perturbation: f64,
    n: usize,
) -> bool {
    if perturbation == 0.0 {
        return true;
    }
    let mut s = MarketState::new(fp.x_star + perturbation, fp.y_star + perturbation);
    for _ in 0..n {
        s = step(params, s);
        if !s.is_finite() || s.x.abs() > 1e12 || s.y.abs() > 1e12 {
            return false;
        }
    }
    let tol = perturbation / 10.0;
    (s.x - fp.x_star).abs() <= tol && (s.y - fp.y_star).abs() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub private_cond: Classification,
    pub state_cond: Classification,
    pub coexistence_cond: Classification,
    pub price_bound_ok: bool,
    pub jacobian_spectral_radius: f64,
    pub jacobian_stable: bool,
}

/// Evaluates every condition. The Jacobian is taken at the coexistence point
/// when it exists and at the trivial point otherwise.
pub fn stability_report(params: &MarketParams) -> StabilityReport {
    let reduced = params.reduce();
    let (bx, by) = (params.beta_x(), params.beta_y());
    let at = coexistence_fixed_point(&reduced, params.a())
        .map(|co| co.point)
        .unwrap_or_else(|_| trivial_fixed_point(&reduced, params.a()));
    let radius = spectral_radius(&jacobian(&reduced, params.a(), at.state()));
    StabilityReport {
        private_cond: private_stability(&reduced),
        state_cond: state_stability(&reduced, bx, by),
        coexistence_cond: coexistence_condition(&reduced, bx, by),
        price_bound_ok: price_bound_check(bx, by),
        jacobian_spectral_radius: radius,
        jacobian_stable: radius < 1.0,
    }
}
