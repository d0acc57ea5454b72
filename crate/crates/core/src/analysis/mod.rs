//! Detection-probability and damage bounds, and the Monte-Carlo oracle that checks them.

pub mod bounds;
pub mod oracle;

pub use bounds::*;
pub use oracle::{monte_carlo_single_level, multinomial_uniform, single_level_trial, Estimate, LegitProfile};
