//! Dynamic regressor extension and mixing (DREM) parameter estimators.
//!
//! The crate covers linear regressions `y = m^T theta` (gradient baseline and
//! the decoupled scalar DREM estimators) and factorisable nonlinear
//! regressions `y = m psi(theta)` where only some entries of `psi` are
//! monotone. A fixed-step RK4 harness drives every continuous-time piece and
//! produces CSV records for the built-in scenarios.

pub mod acceptance;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod linear;
pub mod matalg;
pub mod nonlinear;
pub mod regression_gen;
pub mod signals;

pub use error::{Error, Result};
pub use harness::rk4::{rk4_integrate, StateHistory};
pub use linear::{EstimatorRun, ExtendedRegression, LinearRegression};
pub use matalg::Matrix;
pub use nonlinear::{
    FactorisableRegression, MonotoneCertificate, ParamBox, ParamMap, ReducedRegression,
};
pub use signals::{AnalyticSignal, Signal, SignalOperator, TimeGrid, Trajectory};
