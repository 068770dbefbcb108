use serde::{Deserialize, Serialize};

use super::{TimeGrid, Trajectory};
use crate::error::{Error, Result};

/// Closed-form time signal, evaluable at any real `t`.
///
/// Signals compose through `Sum`, `Product`, `Scaled` and `Delayed`, so
/// regression outputs `y = m^T theta` stay analytic and filters can evaluate
/// their inputs exactly at RK4 stage times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticSignal {
    Constant {
        value: f64,
    },
    /// `amplitude * sin(frequency * t + phase)`
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `sin(t) / sqrt(t + offset)`
    InverseSqrtSine {
        offset: f64,
    },
    /// Time derivative of [`AnalyticSignal::InverseSqrtSine`]:
    /// `cos(t) / sqrt(t + offset) - sin(t) / (2 (t + offset)^{3/2})`
    InverseSqrtSineRate {
        offset: f64,
    },
    Sum {
        terms: Vec<AnalyticSignal>,
    },
    Product {
        factors: Vec<AnalyticSignal>,
    },
    Scaled {
        gain: f64,
        signal: Box<AnalyticSignal>,
    },
    /// `signal(t - delay)`
    Delayed {
        delay: f64,
        signal: Box<AnalyticSignal>,
    },
}

impl AnalyticSignal {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn sine() -> Self {
        Self::Sinusoid {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        }
    }

    pub fn cosine() -> Self {
        Self::Sinusoid {
            amplitude: 1.0,
            frequency: 1.0,
            phase: std::f64::consts::FRAC_PI_2,
        }
    }

    /// `g(t) = sin(t) / sqrt(1 + t)`.
    pub fn decaying_sine() -> Self {
        Self::InverseSqrtSine { offset: 1.0 }
    }

    /// `g + dg/dt` for `g = sin(t) / sqrt(1 + t)`: a bounded regressor
    /// component that vanishes asymptotically, so `[1, g + dg/dt]` is not
    /// persistently exciting.
    pub fn decaying_sine_plus_rate() -> Self {
        Self::Sum {
            terms: vec![
                Self::InverseSqrtSine { offset: 1.0 },
                Self::InverseSqrtSineRate { offset: 1.0 },
            ],
        }
    }

    /// `sin(t) / sqrt(t + 2 pi)`.
    pub fn slow_decaying_sine() -> Self {
        Self::InverseSqrtSine {
            offset: 2.0 * std::f64::consts::PI,
        }
    }

    pub fn scaled(self, gain: f64) -> Self {
        Self::Scaled {
            gain,
            signal: Box::new(self),
        }
    }

    pub fn delayed(self, delay: f64) -> Self {
        Self::Delayed {
            delay,
            signal: Box::new(self),
        }
    }

    /// `sum_i coeffs[i] * signals[i]`, dropping zero coefficients.
    pub fn linear_combination(signals: &[AnalyticSignal], coeffs: &[f64]) -> Self {
        let terms = signals
            .iter()
            .zip(coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(s, &c)| {
                if c == 1.0 {
                    s.clone()
                } else {
                    s.clone().scaled(c)
                }
            })
            .collect();
        Self::Sum { terms }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * t + phase).sin(),
            Self::InverseSqrtSine { offset } => t.sin() / (t + offset).sqrt(),
            Self::InverseSqrtSineRate { offset } => {
                let s = t + offset;
                t.cos() / s.sqrt() - t.sin() / (2.0 * s * s.sqrt())
            }
            Self::Sum { terms } => terms.iter().map(|s| s.eval(t)).sum(),
            Self::Product { factors } => factors.iter().map(|s| s.eval(t)).product(),
            Self::Scaled { gain, signal } => gain * signal.eval(t),
            Self::Delayed { delay, signal } => signal.eval(t - delay),
        }
    }

    /// Samples the signal on `grid`; a non-finite value is reported with its
    /// sample index.
    pub fn sample(&self, grid: &TimeGrid) -> Result<Trajectory> {
        let values: Vec<f64> = grid.times().map(|t| self.eval(t)).collect();
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Trajectory::from_parts(*grid, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_samples_to_ones() {
        let g = TimeGrid::new(-3.0, 0.5, 9).unwrap();
        let ones = AnalyticSignal::constant(1.0).sample(&g).unwrap();
        assert!(ones.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn decaying_sine_vanishes_at_origin() {
        assert_eq!(AnalyticSignal::decaying_sine().eval(0.0), 0.0);
    }

    #[test]
    fn regressor_component_matches_closed_form() {
        // independent evaluation of (sin t + cos t)/sqrt(1+t) - sin t / (2 (1+t)^{3/2})
        let closed =
            |t: f64| (t.sin() + t.cos()) / (1.0 + t).sqrt() - t.sin() / (2.0 * (1.0 + t).powf(1.5));
        let m2 = AnalyticSignal::decaying_sine_plus_rate();
        assert_eq!(m2.eval(0.0), 1.0);
        for t in [0.3, 1.0, 7.5, 123.0] {
            assert!((m2.eval(t) - closed(t)).abs() < 1e-15);
        }
        // and the rate really is the derivative of g
        let g = AnalyticSignal::decaying_sine();
        let rate = AnalyticSignal::InverseSqrtSineRate { offset: 1.0 };
        for t in [0.5, 2.0, 10.0] {
            let h = 1e-5;
            let fd = (g.eval(t + h) - g.eval(t - h)) / (2.0 * h);
            assert!((fd - rate.eval(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_arguments_are_supported_where_defined() {
        let m1 = AnalyticSignal::slow_decaying_sine();
        let t = -1.5 * PI;
        assert!((m1.eval(t) - t.sin() / (t + 2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn non_finite_sample_reports_index() {
        let g = TimeGrid::new(-3.0, 1.0, 4).unwrap();
        let err = AnalyticSignal::decaying_sine().sample(&g).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 0 }));
    }

    #[test]
    fn serde_round_trip() {
        let s = AnalyticSignal::Sum {
            terms: vec![
                AnalyticSignal::sine().scaled(2.0),
                AnalyticSignal::constant(1.0).delayed(0.5),
            ],
        };
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<AnalyticSignal>(&json).unwrap(), s);
    }
}
