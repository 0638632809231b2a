//! Solver defaults, optionally loaded from a `key = value` file.

use std::path::Path;

use serde::Deserialize;

use crate::cascade::{self, PeriodSettings};
use crate::error::{Error, Result};
use crate::market_map::DEFAULT_DIVERGENCE_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub burn_in: usize,
    pub window: usize,
    pub period_tol: f64,
    pub max_period: usize,
    pub bisect_tol: f64,
    pub divergence_threshold: f64,
    /// Logistic seed `z0`.
    pub seed_z: f64,
    /// Offset applied to both coordinates of the coexistence point before
    /// iterating the coupled map.
    pub perturbation: f64,
    /// Start of the coupled orbit when no positive equilibrium exists.
    pub fallback_x: f64,
    pub fallback_y: f64,
    pub lyapunov_steps: usize,
    pub doublings: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            burn_in: cascade::DEFAULT_BURN_IN,
            window: cascade::DEFAULT_WINDOW,
            period_tol: cascade::DEFAULT_PERIOD_TOL,
            max_period: cascade::DEFAULT_MAX_PERIOD,
            bisect_tol: cascade::DEFAULT_BISECT_TOL,
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
            seed_z: cascade::DEFAULT_SEED,
            perturbation: 1e-4,
            fallback_x: 0.1,
            fallback_y: 0.1,
            lyapunov_steps: 1_000_000,
            doublings: 4,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("burn_in", self.burn_in),
            ("window", self.window),
            ("max_period", self.max_period),
            ("lyapunov_steps", self.lyapunov_steps),
            ("doublings", self.doublings),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("`{name}` must be positive")));
        }
        let reals = [
            ("period_tol", self.period_tol),
            ("bisect_tol", self.bisect_tol),
            ("divergence_threshold", self.divergence_threshold),
            ("seed_z", self.seed_z),
            ("perturbation", self.perturbation),
            ("fallback_x", self.fallback_x),
            ("fallback_y", self.fallback_y),
        ];
        if let Some((name, v)) = reals.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config(format!("`{name}` must be positive, got {v}")));
        }
        Ok(())
    }

    pub fn period_settings(&self) -> PeriodSettings {
        PeriodSettings {
            burn_in: self.burn_in,
            window: self.window,
            tol: self.period_tol,
            max_period: self.max_period,
            seed: self.seed_z,
        }
    }
}
