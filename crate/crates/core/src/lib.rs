//! Coupled point-map model of a market shared by a private seller and a
//! state seller.
//!
//! The private volume follows `X' = X (αC0 - μβx X Y)` and the state volume
//! follows `Y' = A (αC0 - μβy X Y)`. This crate iterates the pair, solves
//! for its stationary points, classifies their stability, and follows the
//! private seller's map through its period-doubling cascade via the
//! logistic form `Z' = 4γ Z (1 - Z)`.

pub mod cascade;
pub mod cli;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod market_map;
pub mod output;
pub mod stability;
pub mod sweep;

pub use error::{Error, Result};
pub use market_map::{MarketParams, MarketState, ReducedParams};
