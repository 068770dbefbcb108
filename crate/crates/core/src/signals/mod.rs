//! Time signals and the stable linear operators that filter them.

mod analytic;
mod delay;
mod grid;
mod lti;

pub use analytic::AnalyticSignal;
pub use delay::{DelayOperator, PreHistory};
pub use grid::{TimeGrid, Trajectory};
pub use lti::{FilterCoefficients, LtiFilter};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A signal that is either known in closed form or only through samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Analytic(AnalyticSignal),
    Sampled(Trajectory),
}

impl Signal {
    /// Value at `t`: exact for analytic signals, cubic interpolation for
    /// sampled ones.
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Self::Analytic(s) => s.eval(t),
            Self::Sampled(x) => x.value_at(t),
        }
    }

    pub fn sample(&self, grid: &TimeGrid) -> Result<Trajectory> {
        match self {
            Self::Analytic(s) => s.sample(grid),
            Self::Sampled(x) => {
                self.check_grid(grid)?;
                Ok(x.clone())
            }
        }
    }

    pub(crate) fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        match self {
            Self::Sampled(x) if x.grid() != grid => Err(Error::Dimension(
                "sampled signal lives on a different grid".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl From<AnalyticSignal> for Signal {
    fn from(s: AnalyticSignal) -> Self {
        Self::Analytic(s)
    }
}

impl From<Trajectory> for Signal {
    fn from(x: Trajectory) -> Self {
        Self::Sampled(x)
    }
}

/// One of the stable operators used to extend a regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalOperator {
    Lti(LtiFilter),
    Delay(DelayOperator),
}

impl SignalOperator {
    /// `alpha / (p + beta)`.
    pub fn first_order(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self::Lti(LtiFilter::first_order(alpha, beta)?))
    }

    pub fn delay(d: f64) -> Result<Self> {
        Ok(Self::Delay(DelayOperator::new(
            d,
            PreHistory::EvaluateAnalytic,
        )?))
    }

    /// Applies the operator with zero initial filter state.
    pub fn apply(&self, input: &Signal, grid: &TimeGrid) -> Result<Trajectory> {
        match self {
            Self::Lti(f) => f.apply_signal(input, grid, &vec![0.0; f.order()]),
            Self::Delay(d) => d.apply(input, grid),
        }
    }
}
