//! Built-in regressors, operators and systems used by the examples, the
//! golden scenarios and the acceptance suite.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::Result;
use crate::linear::LinearRegression;
use crate::matalg::Matrix;
use crate::nonlinear::{
    check_monotone, FactorisableRegression, MonotoneCertificate, ParamBox, ParamMap,
};
use crate::regression_gen::ParametrisedSystem;
use crate::signals::{AnalyticSignal, LtiFilter, SignalOperator};

/// True parameters of the two-parameter linear example.
pub const DECAYING_THETA: [f64; 2] = [-3.0, 3.0];

/// `m = [1, g + dg/dt]` with `g = sin t / sqrt(1 + t)`: not persistently
/// exciting, yet `phi = -dg/dt` after filtering with `1/(p + 1)` has
/// infinite energy.
pub fn decaying_regressor() -> Vec<AnalyticSignal> {
    vec![
        AnalyticSignal::constant(1.0),
        AnalyticSignal::decaying_sine_plus_rate(),
    ]
}

pub fn decaying_regression() -> LinearRegression {
    LinearRegression::simulated(decaying_regressor(), &DECAYING_THETA).expect("static dimensions")
}

/// `-dg/dt`, the steady-state `phi` of the two-parameter example.
pub fn decaying_phi_limit() -> AnalyticSignal {
    AnalyticSignal::InverseSqrtSineRate { offset: 1.0 }.scaled(-1.0)
}

/// `1 / (p + 1)`.
pub fn unit_lag() -> SignalOperator {
    SignalOperator::first_order(1.0, 1.0).expect("stable filter")
}

pub fn sin_cos_regressor() -> Vec<AnalyticSignal> {
    vec![AnalyticSignal::sine(), AnalyticSignal::cosine()]
}

/// `c (p + 1) / (p^2 + p + 2)`: unit-frequency gain `c` with zero phase, so
/// extending `[sin t, cos t]` with it gives a singular steady-state
/// extended regressor.
pub fn unit_frequency_filter(c: f64) -> Result<SignalOperator> {
    Ok(SignalOperator::Lti(LtiFilter::new(
        &[c, c],
        &[1.0, 1.0, 2.0],
    )?))
}

/// `m = [sin t / sqrt(t + 2 pi), 1]`, `psi = [theta - e^{-theta}, cos theta]`.
pub fn delay_example_regression(theta: f64) -> FactorisableRegression {
    let m = vec![vec![
        AnalyticSignal::slow_decaying_sine(),
        AnalyticSignal::constant(1.0),
    ]];
    FactorisableRegression::simulated(m, ParamMap::scalar_example(), &[0], &[theta])
        .expect("static dimensions")
}

/// Delay by `pi`, inside the admissible range `[pi/2, 3 pi/2]`.
pub fn example_delay() -> SignalOperator {
    SignalOperator::delay(PI).expect("non-negative delay")
}

/// Certificate for `theta - e^{-theta}` on `[-1, 3]`.
pub fn delay_example_certificate() -> MonotoneCertificate {
    let psi1 = ParamMap::scalar_example()
        .restrict(&[0])
        .expect("static index");
    check_monotone(
        &psi1,
        &Matrix::identity(1),
        &ParamBox::new(vec![-1.0], vec![3.0]).expect("valid box"),
        256,
    )
    .expect("monotone on the box")
}

pub const VECTOR_THETA: [f64; 2] = [-1.0, 1.0];

/// `n = 2, p = 3, q = 2` example with columns `[bad, good_1, good_2]`:
/// `m = [[1, sin t, cos t], [0, cos t, -sin t]]` and `psi =
/// [sin(theta_1 theta_2), theta_1 - e^{-theta_1} + theta_2,
/// theta_2^3 / 3 + theta_2 + theta_1]`.
pub fn vector_demo_regression(theta: &[f64]) -> Result<FactorisableRegression> {
    let m = vec![
        vec![
            AnalyticSignal::constant(1.0),
            AnalyticSignal::sine(),
            AnalyticSignal::cosine(),
        ],
        vec![
            AnalyticSignal::constant(0.0),
            AnalyticSignal::cosine(),
            AnalyticSignal::sine().scaled(-1.0),
        ],
    ];
    FactorisableRegression::simulated(m, ParamMap::vector_example(), &[1, 2], theta)
}

/// Certificate for the good part of the vector example on `theta* +- 0.3`
/// with `P = I`.
pub fn vector_demo_certificate() -> MonotoneCertificate {
    let g = ParamMap::vector_example()
        .restrict(&[1, 2])
        .expect("static indices");
    let dom = ParamBox::around(&VECTOR_THETA, 0.3).expect("valid box");
    check_monotone(&g, &Matrix::identity(2), &dom, 1024).expect("monotone on the box")
}

/// Operating point of the scalar linearisation example.
pub const LINEARISED_X_STAR: f64 = FRAC_PI_4;
pub const LINEARISED_THETA: f64 = 1.0;

/// `dx/dt = -x^3 + u + theta sin x` linearised around `x* = pi/4`.
///
/// The constant input `u` makes `x* + amplitude` the equilibrium, so a run
/// from `x*` settles at a deviation of exactly `amplitude`. Returns the
/// system and its initial state.
pub fn linearised_scalar(amplitude: f64) -> Result<(ParametrisedSystem, Vec<f64>)> {
    let x_bar = LINEARISED_X_STAR + amplitude;
    let u = x_bar.powi(3) - LINEARISED_THETA * x_bar.sin();
    let sys = ParametrisedSystem::new(
        1,
        vec![LINEARISED_X_STAR],
        move |x, _| vec![-x[0].powi(3) + u],
        |x, th| vec![th[0] * x[0].sin()],
    )?
    .with_steady_state(
        |th| vec![th[0] * LINEARISED_X_STAR.sin()],
        |th| Matrix::diagonal(&[th[0] * LINEARISED_X_STAR.cos()]),
    )
    .with_theta(&[LINEARISED_THETA])?;
    Ok((sys, vec![LINEARISED_X_STAR]))
}
