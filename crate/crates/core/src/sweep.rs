//! Regime classification over the `(c, βx/βy)` plane.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cascade::{find_period, OrbitSummary};
use crate::config::RunConfig;
use crate::equilibrium::coexistence_fixed_point;
use crate::error::{Error, Result};
use crate::market_map::{step, MarketParams, MarketState};
use crate::stability::{
    coexistence_condition, jacobian, private_stability, state_stability, Classification,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    StableCoexistence,
    PrivateUnstable,
    StateUnstable,
    BothUnstable,
    /// Both per-seller conditions hold but `βx > 4/3 βy`.
    PriceBoundViolated,
    NoPositiveEquilibrium,
    PeriodK(usize),
    Chaotic,
    Divergent,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::StableCoexistence => f.write_str("StableCoexistence"),
            Regime::PrivateUnstable => f.write_str("PrivateUnstable"),
            Regime::StateUnstable => f.write_str("StateUnstable"),
            Regime::BothUnstable => f.write_str("BothUnstable"),
            Regime::PriceBoundViolated => f.write_str("PriceBoundViolated"),
            Regime::NoPositiveEquilibrium => f.write_str("NoPositiveEquilibrium"),
            Regime::PeriodK(k) => write!(f, "Period{k}"),
            Regime::Chaotic => f.write_str("Chaotic"),
            Regime::Divergent => f.write_str("Divergent"),
        }
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "StableCoexistence" => Regime::StableCoexistence,
            "PrivateUnstable" => Regime::PrivateUnstable,
            "StateUnstable" => Regime::StateUnstable,
            "BothUnstable" => Regime::BothUnstable,
            "PriceBoundViolated" => Regime::PriceBoundViolated,
            "NoPositiveEquilibrium" => Regime::NoPositiveEquilibrium,
            "Chaotic" => Regime::Chaotic,
            "Divergent" => Regime::Divergent,
            other => other
                .strip_prefix("Period")
                .and_then(|k| k.parse().ok())
                .map(Regime::PeriodK)
                .ok_or_else(|| Error::Config(format!("unknown regime `{other}`")))?,
        })
    }
}

impl OrbitSummary {
    /// The empirical regime of an iterated orbit.
    pub fn regime(&self) -> Regime {
        match (self.diverged, self.period) {
            (true, _) => Regime::Divergent,
            (false, Some(k)) => Regime::PeriodK(k),
            (false, None) => Regime::Chaotic,
        }
    }
}

/// Regime implied by the per-seller conditions and the price bound.
pub fn analytic_regime(params: &MarketParams) -> Regime {
    let reduced = params.reduce();
    let positive = coexistence_fixed_point(&reduced, params.a())
        .map(|co| !co.no_positive_equilibrium)
        .unwrap_or(false);
    if !positive {
        return Regime::NoPositiveEquilibrium;
    }
    let (bx, by) = (params.beta_x(), params.beta_y());
    if coexistence_condition(&reduced, bx, by).is_stable() {
        return Regime::StableCoexistence;
    }
    match (
        private_stability(&reduced).is_stable(),
        state_stability(&reduced, bx, by).is_stable(),
    ) {
        (false, false) => Regime::BothUnstable,
        (false, true) => Regime::PrivateUnstable,
        (true, false) => Regime::StateUnstable,
        (true, true) => Regime::PriceBoundViolated,
    }
}

/// Margin of the coexistence condition at `params`.
pub fn coexistence_margin(params: &MarketParams) -> Classification {
    coexistence_condition(&params.reduce(), params.beta_x(), params.beta_y())
}

/// Iterates the coupled map and summarises its attractor.
///
/// Period detection compares both coordinates; the exponent is the largest
/// Lyapunov exponent from a tangent vector carried through the window.
/// `samples` holds private volumes.
pub fn coupled_orbit_summary(params: &MarketParams, init: MarketState, cfg: &RunConfig) -> OrbitSummary {
    let threshold = cfg.divergence_threshold;
    let escaped = |s: &MarketState| !s.is_finite() || s.x.abs() > threshold || s.y.abs() > threshold;
    let diverged = OrbitSummary {
        period: None,
        lyapunov: f64::INFINITY,
        diverged: true,
        samples: Vec::new(),
    };
    let reduced = params.reduce();

    let mut s = init;
    if escaped(&s) {
        return diverged;
    }
    for _ in 0..cfg.burn_in {
        s = step(params, s);
        if escaped(&s) {
            return diverged;
        }
    }
    let mut window = Vec::with_capacity(cfg.window);
    let mut tangent = [std::f64::consts::FRAC_1_SQRT_2; 2];
    let mut log_sum = 0.0;
    let mut collapsed = false;
    for _ in 0..cfg.window {
        window.push(s);
        if !collapsed {
            let v = jacobian(&reduced, params.a(), s).apply(tangent);
            let norm = v[0].hypot(v[1]);
            if norm == 0.0 {
                collapsed = true;
            } else {
                log_sum += norm.ln();
                tangent = [v[0] / norm, v[1] / norm];
            }
        }
        s = step(params, s);
        if escaped(&s) {
            return diverged;
        }
    }
    let lyapunov = if collapsed {
        f64::NEG_INFINITY
    } else {
        log_sum / cfg.window as f64
    };
    let period = find_period(&window, cfg.max_period, cfg.period_tol, |a, b| {
        (a.x - b.x).abs().max((a.y - b.y).abs())
    });
    let keep = period.unwrap_or(window.len());
    OrbitSummary {
        period,
        lyapunov,
        diverged: false,
        samples: window[..keep].iter().map(|s| s.x).collect(),
    }
}

/// Analytic regime plus what the coupled orbit actually does, starting from
/// the perturbed coexistence point (or the fallback seed when no positive
/// equilibrium exists).
pub fn classify_regime(params: &MarketParams, cfg: &RunConfig) -> (Regime, OrbitSummary) {
    let analytic = analytic_regime(params);
    let init = match analytic {
        Regime::NoPositiveEquilibrium => MarketState::new(cfg.fallback_x, cfg.fallback_y),
        _ => {
            let fp = coexistence_fixed_point(&params.reduce(), params.a())
                .expect("positive equilibrium is nondegenerate")
                .point;
            MarketState::new(fp.x_star + cfg.perturbation, fp.y_star + cfg.perturbation)
        }
    };
    (analytic, coupled_orbit_summary(params, init, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub analytic: Regime,
    pub empirical_period: Option<usize>,
    pub lyapunov: f64,
}

impl SweepCell {
    fn same_bits(&self, other: &Self) -> bool {
        self.analytic == other.analytic
            && self.empirical_period == other.empirical_period
            && self.lyapunov.to_bits() == other.lyapunov.to_bits()
    }
}

/// Dense grid over `c` and `βx/βy`. Rows run over the ratio axis, so cell
/// `(i_ratio, i_c)` lives at `i_ratio * c_axis.len() + i_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub c_axis: Vec<f64>,
    pub ratio_axis: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, i_ratio: usize, i_c: usize) -> &SweepCell {
        &self.cells[i_ratio * self.c_axis.len() + i_c]
    }

    /// Iterates `(c, ratio, cell)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, &SweepCell)> + '_ {
        let nc = self.c_axis.len();
        self.cells
            .iter()
            .enumerate()
            .map(move |(k, cell)| (self.c_axis[k % nc], self.ratio_axis[k / nc], cell))
    }

    /// Equality that also distinguishes NaN payloads and signed zeros.
    pub fn bit_eq(&self, other: &Self) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        bits(&self.c_axis) == bits(&other.c_axis)
            && bits(&self.ratio_axis) == bits(&other.ratio_axis)
            && self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| a.same_bits(b))
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Classifies every cell of an `nc x nr` grid with `μ = 1`, `C0 = 1`,
/// `α = c`, `βy = 1`, `βx = ratio` and state supply `a`.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    c_lo: f64,
    c_hi: f64,
    ratio_lo: f64,
    ratio_hi: f64,
    nc: usize,
    nr: usize,
    a: f64,
    cfg: &RunConfig,
) -> Result<SweepGrid> {
    let c_axis = linspace(c_lo, c_hi, nc);
    let ratio_axis = linspace(ratio_lo, ratio_hi, nr);
    let mut params = Vec::with_capacity(nc * nr);
    for &ratio in &ratio_axis {
        for &c in &c_axis {
            params.push(MarketParams::from_plane(c, ratio, a)?);
        }
    }
    let cells = params
        .par_iter()
        .map(|p| {
            let (analytic, summary) = classify_regime(p, cfg);
            SweepCell {
                analytic,
                empirical_period: summary.period,
                lyapunov: summary.lyapunov,
            }
        })
        .collect();
    Ok(SweepGrid {
        c_axis,
        ratio_axis,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(c: f64, ratio: f64) -> MarketParams {
        MarketParams::from_plane(c, ratio, 1.0).unwrap()
    }

    #[test]
    fn regime_names_round_trip() {
        for r in [
            Regime::StableCoexistence,
            Regime::PrivateUnstable,
            Regime::StateUnstable,
            Regime::BothUnstable,
            Regime::PriceBoundViolated,
            Regime::NoPositiveEquilibrium,
            Regime::PeriodK(8),
            Regime::Chaotic,
            Regime::Divergent,
        ] {
            assert_eq!(r.to_string().parse::<Regime>().unwrap(), r);
        }
        assert!("Period".parse::<Regime>().is_err());
        assert!("Stable".parse::<Regime>().is_err());
    }

    #[test]
    fn classify_examples() {
        let cfg = RunConfig::default();
        let (analytic, summary) = classify_regime(&plane(1.2, 1.0), &cfg);
        assert_eq!(analytic, Regime::StableCoexistence);
        assert_eq!(summary.period, Some(1));
        assert!(summary.lyapunov < 0.0);

        let (analytic, _) = classify_regime(&plane(2.5, 1.0), &cfg);
        assert_eq!(analytic, Regime::StateUnstable);

        let (analytic, summary) = classify_regime(&plane(4.0, 1.0), &cfg);
        assert_eq!(analytic, Regime::BothUnstable);
        assert_ne!(summary.period, Some(1));
    }

    #[test]
    fn regimes_off_the_coexistence_region() {
        assert_eq!(analytic_regime(&plane(0.8, 1.0)), Regime::NoPositiveEquilibrium);
        assert_eq!(analytic_regime(&plane(1.0, 1.0)), Regime::NoPositiveEquilibrium);
        // y* = c - 2 (c - 1) <= 0 once c >= 2 at ratio 1/2
        assert_eq!(analytic_regime(&plane(2.5, 0.5)), Regime::NoPositiveEquilibrium);
        assert_eq!(analytic_regime(&plane(3.2, 1.5)), Regime::PrivateUnstable);
        assert_eq!(analytic_regime(&plane(2.0, 1.5)), Regime::PriceBoundViolated);
    }

    #[test]
    fn no_equilibrium_cell_starts_from_fallback() {
        let cfg = RunConfig::default();
        let (analytic, summary) = classify_regime(&plane(0.7, 1.0), &cfg);
        assert_eq!(analytic, Regime::NoPositiveEquilibrium);
        // private seller dies out, state volume settles at a c
        assert_eq!(summary.period, Some(1));
        assert!(summary.samples[0].abs() < 1e-12);
    }

    #[test]
    fn small_grid_matches_pointwise() {
        let cfg = RunConfig {
            burn_in: 2000,
            ..RunConfig::default()
        };
        let grid = sweep(1.2, 2.5, 1.0, 1.5, 2, 2, 1.0, &cfg).unwrap();
        assert_eq!(grid.cells.len(), 4);
        for (c, ratio, cell) in grid.iter() {
            let (analytic, summary) = classify_regime(&plane(c, ratio), &cfg);
            assert_eq!(cell.analytic, analytic);
            assert_eq!(cell.empirical_period, summary.period);
            assert_eq!(cell.lyapunov.to_bits(), summary.lyapunov.to_bits());
        }
        assert_eq!(grid.cell(0, 0).analytic, Regime::StableCoexistence);
        assert_eq!(grid.cell(1, 0).analytic, Regime::PriceBoundViolated);
    }

    #[test]
    fn region_below_one_has_no_equilibrium() {
        let cfg = RunConfig {
            burn_in: 500,
            window: 256,
            ..RunConfig::default()
        };
        let grid = sweep(0.3, 0.9, 0.5, 2.0, 4, 3, 1.0, &cfg).unwrap();
        assert!(grid.cells.iter().all(|c| c.analytic == Regime::NoPositiveEquilibrium));
    }
}
