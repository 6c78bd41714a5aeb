//! Fourier estimation of integrated volatility of volatility from
//! high-frequency prices, together with the feasible asymptotic variances,
//! realized-estimator baselines, SDE simulators and a Monte Carlo harness.
//!
//! The numerical core is generic over the scalar type via [`float::Real`];
//! concrete `f64` aliases are exported at the crate root.

pub mod baselines;
pub mod empirics;
pub mod error;
pub mod estimators;
pub mod float;
pub mod fourier;
pub mod kernels;
pub mod mc;
pub mod series;
pub mod simulate;
pub mod stats;
pub mod tuning;

pub use error::{Error, Result};
pub use float::Real;

/// `f64` instantiations of the core types.
pub type PriceSeries64 = series::PriceSeries<f64>;
pub type CoeffArray64 = fourier::CoeffArray<f64>;
pub type EstimatorConfig64 = estimators::EstimatorConfig<f64>;
pub type VolvolEstimate64 = estimators::VolvolEstimate<f64>;
pub type HestonParams64 = simulate::HestonParams<f64>;
pub type SvvParams64 = simulate::SvvParams<f64>;
pub type SimPath64 = simulate::SimPath<f64>;
pub type ExperimentSpec64 = mc::ExperimentSpec<f64>;
pub type ExperimentResult64 = mc::ExperimentResult<f64>;
pub type DailySeries64 = empirics::DailySeries<f64>;
