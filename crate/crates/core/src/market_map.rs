//! The coupled two-seller market map.
//!
//! One private seller and one state seller trade interchangeable goods. The
//! private volume follows `x' = x (C - δx x y)` and the state volume follows
//! `y' = A (C - δy x y)`, where `C = α C0` and `δi = μ βi`. Both coordinates
//! are advanced from the same old pair.

use crate::error::{Error, Result};

/// Default escape threshold for orbit iteration.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Raw model parameters. All six are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    alpha: f64,
    c0: f64,
    mu: f64,
    beta_x: f64,
    beta_y: f64,
    a: f64,
}

impl MarketParams {
    pub fn new(alpha: f64, c0: f64, mu: f64, beta_x: f64, beta_y: f64, a: f64) -> Result<Self> {
        for (name, value) in [
            ("alpha", alpha),
            ("c0", c0),
            ("mu", mu),
            ("beta_x", beta_x),
            ("beta_y", beta_y),
            ("a", a),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(Self {
            alpha,
            c0,
            mu,
            beta_x,
            beta_y,
            a,
        })
    }

    /// Parameters on the `(c, βx/βy)` plane: `μ = 1`, `C0 = 1`, `α = c`,
    /// `βy = 1`, `βx = ratio`.
    pub fn from_plane(c: f64, ratio: f64, a: f64) -> Result<Self> {
        Self::new(c, 1.0, 1.0, ratio, 1.0, a)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn beta_x(&self) -> f64 {
        self.beta_x
    }

    pub fn beta_y(&self) -> f64 {
        self.beta_y
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn reduce(&self) -> ReducedParams {
        ReducedParams {
            c: self.alpha * self.c0,
            delta_x: self.mu * self.beta_x,
            delta_y: self.mu * self.beta_y,
        }
    }
}

/// Reduced quantities `C = α C0`, `δx = μ βx`, `δy = μ βy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub c: f64,
    pub delta_x: f64,
    pub delta_y: f64,
}

pub fn reduce(params: &MarketParams) -> ReducedParams {
    params.reduce()
}

/// Last sale volumes `(Xn, Yn)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub x: f64,
    pub y: f64,
}

impl MarketState {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn escaped(&self, threshold: f64) -> bool {
        !self.is_finite() || self.x.abs() > threshold || self.y.abs() > threshold
    }
}

/// One synchronous step of both maps.
pub fn step(params: &MarketParams, s: MarketState) -> MarketState {
    let r = params.reduce();
    let crossing = s.x * s.y;
    MarketState {
        x: s.x * (r.c - r.delta_x * crossing),
        y: params.a * (r.c - r.delta_y * crossing),
    }
}

/// Private map with the state volume frozen at `y_star`.
pub fn step_private_fixed_y(params: &MarketParams, x: f64, y_star: f64) -> f64 {
    let r = params.reduce();
    x * (r.c - r.delta_x * (x * y_star))
}

/// State map with the private volume frozen at `x_star`. Affine in `y`.
pub fn step_state_fixed_x(params: &MarketParams, y: f64, x_star: f64) -> f64 {
    let r = params.reduce();
    params.a * (r.c - r.delta_y * (x_star * y))
}

/// A finite sequence of states, truncated at the first escape.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// `states[0]` is the initial state; `states[k]` is after `k` steps.
    pub states: Vec<MarketState>,
    pub diverged: bool,
    /// Index into `states` of the first state that escaped.
    pub diverged_at: Option<usize>,
}

impl Orbit {
    pub fn last(&self) -> MarketState {
        *self.states.last().expect("orbit holds at least the initial state")
    }
}

/// Applies [`step`] `n` times. Iteration stops at the first state that is
/// non-finite or exceeds `divergence_threshold` in either coordinate; that
/// state is kept as the last entry.
pub fn iterate(
    params: &MarketParams,
    init: MarketState,
    n: usize,
    divergence_threshold: f64,
) -> Orbit {
    let mut states = Vec::with_capacity(n + 1);
    states.push(init);
    if init.escaped(divergence_threshold) {
        return Orbit {
            states,
            diverged: true,
            diverged_at: Some(0),
        };
    }
    let mut s = init;
    for k in 1..=n {
        s = step(params, s);
        states.push(s);
        if s.escaped(divergence_threshold) {
            return Orbit {
                states,
                diverged: true,
                diverged_at: Some(k),
            };
        }
    }
    Orbit {
        states,
        diverged: false,
        diverged_at: None,
    }
}
