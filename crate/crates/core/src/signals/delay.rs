use serde::{Deserialize, Serialize};

use super::{Signal, TimeGrid, Trajectory};
use crate::error::{Error, Result};

/// What a delay reads when `t - d` falls before the first sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreHistory {
    /// Evaluate the closed form at `t - d`; only valid for analytic inputs.
    #[default]
    EvaluateAnalytic,
    /// Use the value at the first grid sample.
    HoldFirstSample,
}

/// Pure delay `u(t) -> u(t - d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DelaySpec")]
pub struct DelayOperator {
    delay: f64,
    pre_history: PreHistory,
}

#[derive(Deserialize)]
struct DelaySpec {
    delay: f64,
    #[serde(default)]
    pre_history: PreHistory,
}

impl TryFrom<DelaySpec> for DelayOperator {
    type Error = Error;

    fn try_from(s: DelaySpec) -> Result<Self> {
        Self::new(s.delay, s.pre_history)
    }
}

impl DelayOperator {
    pub fn new(delay: f64, pre_history: PreHistory) -> Result<Self> {
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(Error::NegativeDelay(delay));
        }
        Ok(Self { delay, pre_history })
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn pre_history(&self) -> PreHistory {
        self.pre_history
    }

    /// Delayed copy of `input` on `grid`. Sampled inputs are linearly
    /// interpolated between samples.
    pub fn apply(&self, input: &Signal, grid: &TimeGrid) -> Result<Trajectory> {
        input.check_grid(grid)?;
        let d = self.delay;
        let values: Vec<f64> = match (input, self.pre_history) {
            (Signal::Analytic(s), PreHistory::EvaluateAnalytic) => {
                grid.times().map(|t| s.eval(t - d)).collect()
            }
            (Signal::Analytic(s), PreHistory::HoldFirstSample) => grid
                .times()
                .map(|t| s.eval((t - d).max(grid.t0())))
                .collect(),
            (Signal::Sampled(_), PreHistory::EvaluateAnalytic) => return Err(Error::DelayPolicy),
            (Signal::Sampled(x), PreHistory::HoldFirstSample) => {
                if d == 0.0 {
                    x.values().to_vec()
                } else {
                    grid.times().map(|t| x.value_at_linear(t - d)).collect()
                }
            }
        };
        Trajectory::new(*grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::AnalyticSignal;
    use std::f64::consts::PI;

    fn grid() -> TimeGrid {
        TimeGrid::spanning(0.0, 20.0, 1e-2).unwrap()
    }

    #[test]
    fn zero_delay_is_identity() {
        let g = grid();
        let sampled = AnalyticSignal::decaying_sine().sample(&g).unwrap();
        let op = DelayOperator::new(0.0, PreHistory::HoldFirstSample).unwrap();
        assert_eq!(
            op.apply(&Signal::Sampled(sampled.clone()), &g).unwrap(),
            sampled
        );
        let op = DelayOperator::new(0.0, PreHistory::EvaluateAnalytic).unwrap();
        assert_eq!(
            op.apply(&Signal::Analytic(AnalyticSignal::decaying_sine()), &g)
                .unwrap(),
            sampled
        );
    }

    #[test]
    fn half_period_delay_flips_sine() {
        let g = grid();
        let op = DelayOperator::new(PI, PreHistory::EvaluateAnalytic).unwrap();
        let out = op
            .apply(&Signal::Analytic(AnalyticSignal::sine()), &g)
            .unwrap();
        for (t, v) in g.times().zip(out.values()) {
            assert!((v + t.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn half_period_delay_of_slow_regressor() {
        // independent substitution: sin(t - pi)/sqrt(t - pi + 2 pi) = -sin t / sqrt(t + pi)
        let g = grid();
        let op = DelayOperator::new(PI, PreHistory::EvaluateAnalytic).unwrap();
        let out = op
            .apply(&Signal::Analytic(AnalyticSignal::slow_decaying_sine()), &g)
            .unwrap();
        for (t, v) in g.times().zip(out.values()) {
            assert!((v + t.sin() / (t + PI).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_input_holds_first_value() {
        let g = grid();
        let sampled = AnalyticSignal::constant(1.0)
            .scaled(3.0)
            .sample(&g)
            .unwrap();
        let op = DelayOperator::new(1.0, PreHistory::HoldFirstSample).unwrap();
        let out = op.apply(&Signal::Sampled(sampled.clone()), &g).unwrap();
        assert!(out.values().iter().all(|&v| v == 3.0));
        let op = DelayOperator::new(1.0, PreHistory::EvaluateAnalytic).unwrap();
        assert!(matches!(
            op.apply(&Signal::Sampled(sampled), &g),
            Err(Error::DelayPolicy)
        ));
    }

    #[test]
    fn sampled_delay_interpolates_linearly() {
        let g = grid();
        let sine = AnalyticSignal::sine().sample(&g).unwrap();
        let op = DelayOperator::new(0.505, PreHistory::HoldFirstSample).unwrap();
        let out = op.apply(&Signal::Sampled(sine), &g).unwrap();
        let err = g
            .times()
            .zip(out.values())
            .filter(|(t, _)| *t > 0.505)
            .fold(0.0f64, |acc, (t, v)| acc.max((v - (t - 0.505).sin()).abs()));
        assert!(err < 2e-5, "{err}");
    }

    #[test]
    fn negative_delay_rejected() {
        assert!(matches!(
            DelayOperator::new(-0.1, PreHistory::HoldFirstSample),
            Err(Error::NegativeDelay(_))
        ));
    }
}
