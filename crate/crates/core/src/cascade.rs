//! Logistic form of the private seller's map and the period-doubling cascade.
//!
//! With the state volume frozen at `Y*`, the substitution
//! `Z = X δx Y* / C` and `4γ = C` turn the private map into
//! `Z' = 4γ Z (1 - Z)`. Everything about the cascade (attractor periods,
//! doubling points, Lyapunov exponents) is computed on that form.
//!
//! The state map with `X*` frozen is affine in `Y`, so it has a single
//! fixed point and no cascade.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market_map::{step_private_fixed_y, step_state_fixed_x, MarketParams, ReducedParams};

pub const DEFAULT_BURN_IN: usize = 10_000;
pub const DEFAULT_WINDOW: usize = 4_096;
pub const DEFAULT_PERIOD_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_PERIOD: usize = 1_024;
pub const DEFAULT_BISECT_TOL: f64 = 1e-6;
#[allow(clippy::approx_constant)]
pub const DEFAULT_SEED: f64 = 0.31830988;

/// Factor applied to the burn-in while resolving a transition.
const ENLARGED_BURN_IN: usize = 10;

/// Slopes below this magnitude make the Lyapunov sum `-inf`.
const ZERO_SLOPE: f64 = 1e-300;

/// Iterates this close to the critical point `z = 1/2` count as landing on
/// it; the float orbit of a superstable cycle can park one ulp away.
const CRITICAL_BAND: f64 = f64::EPSILON;

/// Growth parameter of `Z' = 4γ Z (1 - Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    gamma: f64,
}

impl LogisticParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma <= 1.0 {
            Ok(Self { gamma })
        } else {
            Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
            })
        }
    }

    /// `γ = C / 4`; exact in binary floating point.
    pub fn from_reduced(reduced: &ReducedParams) -> Result<Self> {
        Self::new(reduced.c / 4.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

pub fn to_logistic(x: f64, reduced: &ReducedParams, y_star: f64) -> f64 {
    x * reduced.delta_x * y_star / reduced.c
}

pub fn from_logistic(z: f64, reduced: &ReducedParams, y_star: f64) -> f64 {
    z * reduced.c / (reduced.delta_x * y_star)
}

pub fn logistic_step(gamma: f64, z: f64) -> f64 {
    4.0 * gamma * z * (1.0 - z)
}

/// Runs the frozen-`Y*` private map and the logistic map side by side for
/// `n` steps and returns the largest gap between `to_logistic(x_k)` and `z_k`.
pub fn conjugacy_check(params: &MarketParams, y_star: f64, x0: f64, n: usize) -> f64 {
    let reduced = params.reduce();
    let gamma = reduced.c / 4.0;
    let mut x = x0;
    let mut z = to_logistic(x0, &reduced, y_star);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        x = step_private_fixed_y(params, x, y_star);
        z = logistic_step(gamma, z);
        worst = worst.max((to_logistic(x, &reduced, y_star) - z).abs());
    }
    worst
}

/// Iteration and detection settings for attractor classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodSettings {
    pub burn_in: usize,
    pub window: usize,
    pub tol: f64,
    pub max_period: usize,
    pub seed: f64,
}

impl Default for PeriodSettings {
    fn default() -> Self {
        Self {
            burn_in: DEFAULT_BURN_IN,
            window: DEFAULT_WINDOW,
            tol: DEFAULT_PERIOD_TOL,
            max_period: DEFAULT_MAX_PERIOD,
            seed: DEFAULT_SEED,
        }
    }
}

/// What an orbit settles into after its transient.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSummary {
    /// Smallest repeat length, absent for aperiodic or escaping orbits.
    pub period: Option<usize>,
    pub lyapunov: f64,
    pub diverged: bool,
    /// One period of the attractor when periodic, the whole window otherwise.
    pub samples: Vec<f64>,
}

impl OrbitSummary {
    pub fn is_chaotic(&self) -> bool {
        self.period.is_none() && !self.diverged
    }
}

/// Smallest `p <= max_period` such that every pair `p` apart in `samples`
/// is within `tol` according to `dist`.
pub(crate) fn find_period<T>(
    samples: &[T],
    max_period: usize,
    tol: f64,
    dist: impl Fn(&T, &T) -> f64,
) -> Option<usize> {
    let limit = max_period.min(samples.len().saturating_sub(1));
    (1..=limit).find(|&p| samples.windows(p + 1).all(|w| dist(&w[0], &w[p]) < tol))
}

fn check_seed(z0: f64) -> Result<()> {
    if z0 > 0.0 && z0 < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSeed(z0))
    }
}

fn logistic_slope(gamma: f64, z: f64) -> f64 {
    4.0 * gamma * (1.0 - 2.0 * z)
}

fn is_flat(gamma: f64, z: f64) -> bool {
    (1.0 - 2.0 * z).abs() <= CRITICAL_BAND || logistic_slope(gamma, z).abs() < ZERO_SLOPE
}

/// Classifies the logistic attractor reached from `settings.seed`.
pub fn detect_period(gamma: f64, settings: &PeriodSettings) -> Result<OrbitSummary> {
    check_seed(settings.seed)?;
    let bounded = gamma <= 1.0;
    let escaped = |z: f64| !(0.0..=1.0).contains(&z);
    let diverged = || OrbitSummary {
        period: None,
        lyapunov: f64::INFINITY,
        diverged: true,
        samples: Vec::new(),
    };

    let mut z = settings.seed;
    for _ in 0..settings.burn_in {
        z = logistic_step(gamma, z);
        if escaped(z) {
            assert!(!bounded, "logistic orbit left [0, 1] at gamma {gamma}");
            return Ok(diverged());
        }
    }
    let mut window = Vec::with_capacity(settings.window);
    let mut log_sum = 0.0;
    let mut superstable = false;
    for _ in 0..settings.window {
        if is_flat(gamma, z) {
            superstable = true;
        } else {
            log_sum += logistic_slope(gamma, z).abs().ln();
        }
        window.push(z);
        z = logistic_step(gamma, z);
        if escaped(z) {
            assert!(!bounded, "logistic orbit left [0, 1] at gamma {gamma}");
            return Ok(diverged());
        }
    }
    let lyapunov = if superstable {
        f64::NEG_INFINITY
    } else {
        log_sum / settings.window as f64
    };
    let period = find_period(&window, settings.max_period, settings.tol, |a, b| (a - b).abs());
    if let Some(p) = period {
        window.truncate(p);
    }
    Ok(OrbitSummary {
        period,
        lyapunov,
        diverged: false,
        samples: window,
    })
}

/// Mean of `ln |4γ (1 - 2 z_k)|` over `n` iterates after `burn_in`.
pub fn lyapunov_exponent(gamma: f64, z0: f64, burn_in: usize, n: usize) -> Result<f64> {
    check_seed(z0)?;
    let mut z = z0;
    for _ in 0..burn_in {
        z = logistic_step(gamma, z);
    }
    let mut sum = 0.0;
    for _ in 0..n {
        if is_flat(gamma, z) {
            return Ok(f64::NEG_INFINITY);
        }
        sum += logistic_slope(gamma, z).abs().ln();
        z = logistic_step(gamma, z);
    }
    Ok(sum / n as f64)
}

/// Parameter values at which the logistic attractor period doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublingCascade {
    /// `points[k-1]` is where period `2^(k-1)` gives way to `2^k`.
    pub points: Vec<f64>,
    /// `(γ_k - γ_{k-1}) / (γ_{k+1} - γ_k)` for each consecutive triple.
    pub feigenbaum_estimates: Vec<f64>,
}

impl DoublingCascade {
    pub fn from_points(points: Vec<f64>) -> Self {
        let feigenbaum_estimates = points
            .windows(3)
            .map(|w| (w[1] - w[0]) / (w[2] - w[1]))
            .collect();
        Self {
            points,
            feigenbaum_estimates,
        }
    }
}

/// Locates the first `k_max` doubling points in `[gamma_lo, gamma_hi]`.
///
/// Each transition is bracketed by a forward scan and then bisected to
/// `bisect_tol`. Near a transition the orbit converges slowly, so brackets
/// are confirmed and bisected with a tenfold burn-in.
pub fn doubling_points(
    gamma_lo: f64,
    gamma_hi: f64,
    k_max: usize,
    bisect_tol: f64,
    settings: &PeriodSettings,
) -> Result<DoublingCascade> {
    if !(gamma_lo > 0.0 && gamma_lo < gamma_hi && gamma_hi <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "gamma range",
            value: gamma_lo,
        });
    }
    let long = PeriodSettings {
        burn_in: settings.burn_in.saturating_mul(ENLARGED_BURN_IN),
        ..*settings
    };
    let base_step = (gamma_hi - gamma_lo) / 2000.0;
    let mut points: Vec<f64> = Vec::with_capacity(k_max);
    let mut start = gamma_lo;

    for k in 1..=k_max {
        let below = 1usize << (k - 1);
        let exceeds = |gamma: f64, s: &PeriodSettings| -> Result<bool> {
            Ok(detect_period(gamma, s)?.period.is_none_or(|p| p > below))
        };
        let failure = || Error::ConvergenceFailure {
            from: below,
            to: 2 * below,
            lo: start,
            hi: gamma_hi,
        };
        let scan_step = match points.as_slice() {
            [.., prev, last] => base_step.min((last - prev) / 20.0),
            _ => base_step,
        }
        .max(bisect_tol);

        // walk past the previous transition until the period has settled
        let mut lo = start;
        while exceeds(lo, settings)? {
            if k == 1 || lo >= gamma_hi {
                return Err(failure());
            }
            lo = (lo + scan_step).min(gamma_hi);
        }
        // then forward until the period grows, confirmed with the long burn-in
        let mut hi = lo;
        loop {
            if hi >= gamma_hi {
                return Err(failure());
            }
            hi = (hi + scan_step).min(gamma_hi);
            if exceeds(hi, settings)? && exceeds(hi, &long)? {
                break;
            }
            lo = hi;
        }
        while hi - lo > bisect_tol {
            let mid = 0.5 * (lo + hi);
            if exceeds(mid, &long)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        points.push(0.5 * (lo + hi));
        start = hi;
    }
    Ok(DoublingCascade::from_points(points))
}

/// The last available interval ratio of the cascade.
pub fn feigenbaum_estimate(cascade: &DoublingCascade) -> Result<f64> {
    cascade
        .feigenbaum_estimates
        .last()
        .copied()
        .ok_or(Error::InsufficientPoints(cascade.points.len()))
}

/// One column of a bifurcation diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub gamma: f64,
    pub summary: OrbitSummary,
}

/// Attractor samples on `steps` evenly spaced values of `γ`, at most
/// `max_samples` per value, in ascending `γ`.
pub fn bifurcation_scan(
    gamma_min: f64,
    gamma_max: f64,
    steps: usize,
    max_samples: usize,
    settings: &PeriodSettings,
) -> Result<Vec<ScanPoint>> {
    check_seed(settings.seed)?;
    let gammas: Vec<f64> = match steps {
        0 => Vec::new(),
        1 => vec![gamma_min],
        n => (0..n)
            .map(|i| gamma_min + (gamma_max - gamma_min) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    gammas
        .into_par_iter()
        .map(|gamma| {
            let mut summary = detect_period(gamma, settings)?;
            summary.samples.truncate(max_samples);
            Ok(ScanPoint { gamma, summary })
        })
        .collect()
}

/// True when the frozen-`X*` state map has zero second differences over
/// `samples` evenly spaced volumes in `[0, 2 A C]`.
pub fn state_map_affinity_check(params: &MarketParams, x_star: f64, samples: usize) -> bool {
    let span = 2.0 * params.a() * params.reduce().c;
    let h = span / (samples.max(3) - 1) as f64;
    let values: Vec<f64> = (0..samples.max(3))
        .map(|i| step_state_fixed_x(params, i as f64 * h, x_star))
        .collect();
    values.windows(3).all(|w| {
        let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (w[2] - 2.0 * w[1] + w[0]).abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE)
    })
}

/// Iterates the frozen-`X*` state map from `y0` and classifies its attractor.
///
/// The map is affine with slope `-A δy X*`; the burn-in is stretched so a
/// contraction reaches rounding level, or an expansion grows by `e^40`,
/// even when the slope is close to one in magnitude.
pub fn restricted_state_orbit(
    params: &MarketParams,
    x_star: f64,
    y0: f64,
    settings: &PeriodSettings,
    divergence_threshold: f64,
) -> OrbitSummary {
    let slope = (params.a() * params.reduce().delta_y * x_star).abs();
    let rate = slope.ln().abs();
    let burn_in = if rate > 0.0 && rate.is_finite() {
        settings.burn_in.max((40.0 / rate).ceil().min(1e8) as usize)
    } else {
        settings.burn_in
    };
    let escaped = |y: f64| !y.is_finite() || y.abs() > divergence_threshold;
    let diverged = OrbitSummary {
        period: None,
        lyapunov: slope.ln(),
        diverged: true,
        samples: Vec::new(),
    };
    let mut y = y0;
    for _ in 0..burn_in {
        y = step_state_fixed_x(params, y, x_star);
        if escaped(y) {
            return diverged;
        }
    }
    let mut window = Vec::with_capacity(settings.window);
    for _ in 0..settings.window {
        window.push(y);
        y = step_state_fixed_x(params, y, x_star);
        if escaped(y) {
            return diverged;
        }
    }
    let period = find_period(&window, settings.max_period, settings.tol, |a, b| (a - b).abs());
    if let Some(p) = period {
        window.truncate(p);
    }
    OrbitSummary {
        period,
        lyapunov: if slope == 0.0 { f64::NEG_INFINITY } else { slope.ln() },
        diverged: false,
        samples: window,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::coexistence_fixed_point;

    fn unit(c: f64) -> MarketParams {
        MarketParams::new(1.0, c, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn substitution_examples() {
        let r = unit(2.0).reduce();
        assert_eq!(to_logistic(0.0, &r, 1.0), 0.0);
        assert_eq!(to_logistic(1.0, &r, 1.0), 0.5);
        assert_eq!(from_logistic(0.0, &r, 1.0), 0.0);
        assert_eq!(from_logistic(0.5, &r, 1.0), 1.0);
    }

    #[test]
    fn logistic_params_from_market() {
        let r = MarketParams::new(0.7, 3.3, 1.0, 1.0, 1.0, 1.0).unwrap().reduce();
        let lp = LogisticParams::from_reduced(&r).unwrap();
        assert_eq!(4.0 * lp.gamma(), r.c);
        assert!(LogisticParams::new(1.5).is_err());
        assert!(LogisticParams::new(0.0).is_err());
    }

    #[test]
    fn logistic_step_examples() {
        assert_eq!(logistic_step(1.0, 0.5), 1.0);
        assert!((logistic_step(0.75, 2.0 / 3.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(logistic_step(0.9, 0.0), 0.0);
    }

    #[test]
    fn conjugacy_examples() {
        let p = unit(2.0);
        let y_star = coexistence_fixed_point(&p.reduce(), 1.0).unwrap().point.y_star;
        assert!(conjugacy_check(&p, y_star, 0.5, 100) < 1e-9);
        assert!(conjugacy_check(&p, y_star, 1.0, 100) < 1e-15);
        assert!(conjugacy_check(&p, y_star, 0.37, 1) < 1e-15);
    }

    #[test]
    fn find_period_basics() {
        let two: [f64; 5] = [0.1, 0.9, 0.1, 0.9, 0.1];
        assert_eq!(find_period(&two, 8, 1e-9, |a, b| (a - b).abs()), Some(2));
        let one = [0.4f64; 6];
        assert_eq!(find_period(&one, 8, 1e-9, |a, b| (a - b).abs()), Some(1));
        let none: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(find_period(&none, 8, 1e-9, |a, b| (a - b).abs()), None);
    }

    #[test]
    fn detect_period_examples() {
        let s = PeriodSettings::default();
        assert_eq!(detect_period(0.7, &s).unwrap().period, Some(1));
        assert_eq!(detect_period(0.8, &s).unwrap().period, Some(2));
        assert_eq!(detect_period(0.875, &s).unwrap().period, Some(4));
        let chaos = detect_period(1.0, &s).unwrap();
        assert!(chaos.is_chaotic());
        assert!(chaos.lyapunov > 0.0);
        assert_eq!(chaos.samples.len(), s.window);
    }

    #[test]
    fn detect_period_rejects_bad_seed() {
        for seed in [0.0, 1.0, -0.2, 1.5] {
            let s = PeriodSettings {
                seed,
                ..Default::default()
            };
            assert!(matches!(detect_period(0.8, &s), Err(Error::InvalidSeed(_))));
        }
    }

    #[test]
    fn detect_period_flags_escape_above_one() {
        let s = PeriodSettings::default();
        let summary = detect_period(1.1, &s).unwrap();
        assert!(summary.diverged);
        assert_eq!(summary.period, None);
    }

    #[test]
    fn fixed_point_samples_match_closed_form() {
        let summary = detect_period(0.7, &PeriodSettings::default()).unwrap();
        assert_eq!(summary.samples.len(), 1);
        assert!((summary.samples[0] - (1.0 - 1.0 / 2.8)).abs() < 1e-9);
    }

    #[test]
    fn lyapunov_examples() {
        let l = lyapunov_exponent(0.7, DEFAULT_SEED, 10_000, 100_000).unwrap();
        assert!((l - 0.8f64.ln()).abs() < 1e-3, "{l}");
        assert_eq!(
            lyapunov_exponent(0.5, DEFAULT_SEED, 10_000, 100_000).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(lyapunov_exponent(0.7, 1.0, 10, 10).is_err());
    }

    #[test]
    fn feigenbaum_needs_three_points() {
        let c = DoublingCascade::from_points(vec![0.75, 0.86]);
        assert!(matches!(feigenbaum_estimate(&c), Err(Error::InsufficientPoints(2))));
        let c = DoublingCascade::from_points(vec![0.0, 4.0, 5.0]);
        assert_eq!(feigenbaum_estimate(&c).unwrap(), 4.0);
    }

    #[test]
    fn unbracketed_transition_fails() {
        let s = PeriodSettings::default();
        // no doubling below 0.74
        assert!(matches!(
            doubling_points(0.6, 0.74, 1, 1e-6, &s),
            Err(Error::ConvergenceFailure { from: 1, to: 2, .. })
        ));
        // already period 2 at the lower end
        assert!(matches!(
            doubling_points(0.8, 0.9, 1, 1e-6, &s),
            Err(Error::ConvergenceFailure { .. })
        ));
    }

    #[test]
    fn first_doubling_point() {
        let c = doubling_points(0.7, 0.8, 1, 1e-6, &PeriodSettings::default()).unwrap();
        assert_eq!(c.points.len(), 1);
        assert!((c.points[0] - 0.75).abs() < 1e-4, "{:?}", c.points);
    }

    #[test]
    fn scan_is_ordered_and_truncated() {
        let pts = bifurcation_scan(0.6, 1.0, 9, 16, &PeriodSettings::default()).unwrap();
        assert_eq!(pts.len(), 9);
        assert!(pts.windows(2).all(|w| w[0].gamma < w[1].gamma));
        assert_eq!(pts[0].summary.samples.len(), 1);
        assert_eq!(pts[8].summary.samples.len(), 16);
    }

    #[test]
    fn state_map_is_affine() {
        let p = MarketParams::new(1.3, 2.1, 0.4, 1.7, 0.6, 3.2).unwrap();
        assert!(state_map_affinity_check(&p, 0.9, 3));
        assert!(state_map_affinity_check(&p, 17.0, 50));
    }

    #[test]
    fn restricted_state_orbit_contracts_or_escapes() {
        let p = unit(1.2);
        let s = PeriodSettings::default();
        // slope 0.2
        let summary = restricted_state_orbit(&p, 0.2, 5.0, &s, 1e12);
        assert_eq!(summary.period, Some(1));
        assert!((summary.samples[0] - 1.0).abs() < 1e-12);
        // slope 3
        let summary = restricted_state_orbit(&p, 3.0, 5.0, &s, 1e12);
        assert!(summary.diverged);
    }
}
