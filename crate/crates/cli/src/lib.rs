//! Command-line experiment runner for the `isl-limits` bounds.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plot;
