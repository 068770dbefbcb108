//! Factorisable nonlinear regressions `y = m psi(theta)` in which only the
//! `q` "good" entries of `psi` are monotone.
//!
//! The reduction filters some rows, annihilates the columns that carry the
//! non-monotone entries and mixes the remainder with the adjugate, leaving
//! `Y = det(Phi) psi_g(theta)`. A gradient law on that regression converges
//! whenever `psi_g` is strongly `P`-monotone and `det(Phi)` is not square
//! integrable.

mod estimator;
mod monotone;
mod param_map;
mod reduce;

pub use estimator::{
    kappa_over, lyapunov_bound, lyapunov_coefficient, monotone_estimator, overparam_gradient,
    LyapunovReport,
};
pub use monotone::{check_monotone, CertificateKind, MonotoneCertificate, ParamBox};
pub use param_map::ParamMap;
pub use reduce::{general_reduce, scalar_reduce, FactorisableRegression, ReducedRegression};
