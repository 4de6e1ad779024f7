//! Pre-averaging estimators for noisy, discretely observed semimartingales:
//! power variations, integrated volatility powers and quadratic variation,
//! feasible central-limit inference (studentized statistics, confidence
//! intervals, a jump test), plus a simulator and Monte Carlo harness that
//! verify the limit behavior at desk scale.

pub mod error;
pub mod estimators;
pub mod inference;
pub mod kernels;
pub mod montecarlo;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
