use serde::{Deserialize, Serialize};

use super::{Signal, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::harness::rk4::rk4_integrate;

/// Proper, exponentially stable SISO transfer function `num(p) / den(p)`,
/// realised in controllable canonical form.
///
/// Coefficients are given in descending powers of `p`. Stability is checked
/// once, at construction, with the Routh–Hurwitz test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FilterCoefficients", into = "FilterCoefficients")]
pub struct LtiFilter {
    num: Vec<f64>,
    den: Vec<f64>,
    /// monic denominator tail `a_1 .. a_n`
    a: Vec<f64>,
    c: Vec<f64>,
    d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterCoefficients {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl TryFrom<FilterCoefficients> for LtiFilter {
    type Error = Error;

    fn try_from(c: FilterCoefficients) -> Result<Self> {
        Self::new(&c.num, &c.den)
    }
}

impl From<LtiFilter> for FilterCoefficients {
    fn from(f: LtiFilter) -> Self {
        Self {
            num: f.num,
            den: f.den,
        }
    }
}

fn strip_leading_zeros(p: &[f64]) -> &[f64] {
    let first = p.iter().position(|&v| v != 0.0).unwrap_or(p.len());
    &p[first..]
}

/// Routh–Hurwitz: true iff every root has strictly negative real part.
fn is_hurwitz(den: &[f64]) -> bool {
    let n = den.len() - 1;
    if n == 0 {
        return true;
    }
    let sign = den[0].signum();
    let p: Vec<f64> = den.iter().map(|v| v * sign).collect();
    if p.iter().any(|&v| v <= 0.0) {
        return false;
    }
    let width = n / 2 + 1;
    let mut prev: Vec<f64> = (0..width)
        .map(|j| p.get(2 * j).copied().unwrap_or(0.0))
        .collect();
    let mut cur: Vec<f64> = (0..width)
        .map(|j| p.get(2 * j + 1).copied().unwrap_or(0.0))
        .collect();
    for _ in 1..n {
        if cur[0] <= 0.0 {
            return false;
        }
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let a = prev.get(j + 1).copied().unwrap_or(0.0);
                let b = cur.get(j + 1).copied().unwrap_or(0.0);
                (cur[0] * a - prev[0] * b) / cur[0]
            })
            .collect();
        prev = cur;
        cur = next;
    }
    cur[0] > 0.0
}

impl LtiFilter {
    pub fn new(num: &[f64], den: &[f64]) -> Result<Self> {
        if num.iter().chain(den).any(|v| !v.is_finite()) {
            return Err(Error::Dimension(
                "filter coefficients must be finite".into(),
            ));
        }
        let num_s = strip_leading_zeros(num);
        let den_s = strip_leading_zeros(den);
        if den_s.is_empty() {
            return Err(Error::Dimension("denominator is identically zero".into()));
        }
        let order = den_s.len() - 1;
        if num_s.len() > den_s.len() {
            return Err(Error::ImproperFilter {
                num: num_s.len() - 1,
                den: order,
            });
        }
        if !is_hurwitz(den_s) {
            return Err(Error::UnstableFilter { den: den.to_vec() });
        }
        let lead = den_s[0];
        let a: Vec<f64> = den_s[1..].iter().map(|v| v / lead).collect();
        let mut b = vec![0.0; order + 1 - num_s.len()];
        b.extend(num_s.iter().map(|v| v / lead));
        let d = b[0];
        // state x_i is the (i-1)-th derivative of the internal variable
        let c = (0..order)
            .map(|i| b[order - i] - a[order - 1 - i] * d)
            .collect();
        Ok(Self {
            num: num.to_vec(),
            den: den.to_vec(),
            a,
            c,
            d,
        })
    }

    /// `alpha / (p + beta)`.
    pub fn first_order(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(&[alpha], &[1.0, beta])
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn numerator(&self) -> &[f64] {
        &self.num
    }

    pub fn denominator(&self) -> &[f64] {
        &self.den
    }

    fn derivative(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        let n = self.order();
        for i in 0..n.saturating_sub(1) {
            dx[i] = x[i + 1];
        }
        if n > 0 {
            let feedback: f64 = (0..n).map(|i| self.a[n - 1 - i] * x[i]).sum();
            dx[n - 1] = u - feedback;
        }
    }

    fn output(&self, x: &[f64], u: f64) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.d * u
    }

    /// Filters a sampled input starting from `initial_state`.
    ///
    /// A zero initial state yields the zero-state response; any other state
    /// adds its exponentially decaying zero-input response.
    pub fn apply(&self, input: &Trajectory, initial_state: &[f64]) -> Result<Trajectory> {
        self.apply_source(|t| input.value_at(t), input.grid(), initial_state)
    }

    /// Filters any [`Signal`] on `grid` from `initial_state`.
    pub fn apply_signal(
        &self,
        input: &Signal,
        grid: &TimeGrid,
        initial_state: &[f64],
    ) -> Result<Trajectory> {
        input.check_grid(grid)?;
        self.apply_source(|t| input.value_at(t), grid, initial_state)
    }

    fn apply_source(
        &self,
        u: impl Fn(f64) -> f64,
        grid: &TimeGrid,
        initial_state: &[f64],
    ) -> Result<Trajectory> {
        if initial_state.len() != self.order() {
            return Err(Error::Dimension(format!(
                "initial state has length {} for a filter of order {}",
                initial_state.len(),
                self.order()
            )));
        }
        if self.order() == 0 {
            let values = grid.times().map(|t| self.d * u(t)).collect();
            return Trajectory::new(*grid, values);
        }
        let states = rk4_integrate(|t, x, dx| self.derivative(x, u(t), dx), initial_state, grid)?;
        let values = grid
            .times()
            .enumerate()
            .map(|(k, t)| self.output(states.state(k), u(t)))
            .collect();
        Trajectory::new(*grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::AnalyticSignal;

    #[test]
    fn stability_is_checked_at_construction() {
        assert!(LtiFilter::new(&[1.0], &[1.0, 1.0]).is_ok());
        assert!(LtiFilter::new(&[1.0], &[1.0, -1.0]).is_err());
        assert!(LtiFilter::new(&[1.0], &[1.0, 0.0, 1.0]).is_err()); // poles on the imaginary axis
        assert!(LtiFilter::new(&[1.0], &[1.0, 1.0, 2.0]).is_ok());
        assert!(LtiFilter::new(&[1.0], &[1.0, 1.0, -2.0]).is_err());
        // (p+1)(p+2)(p+3)
        assert!(LtiFilter::new(&[1.0], &[1.0, 6.0, 11.0, 6.0]).is_ok());
        // (p-1)(p+2)(p+3) = p^3 + 4p^2 + p - 6
        assert!(LtiFilter::new(&[1.0], &[1.0, 4.0, 1.0, -6.0]).is_err());
        // p^3 + p^2 + p + 2 has a right half-plane pair despite positive coefficients
        assert!(LtiFilter::new(&[1.0], &[1.0, 1.0, 1.0, 2.0]).is_err());
        // negated denominator describes the same stable poles
        assert!(LtiFilter::new(&[-1.0], &[-1.0, -1.0]).is_ok());
    }

    #[test]
    fn improper_filter_rejected() {
        assert!(matches!(
            LtiFilter::new(&[1.0, 0.0, 0.0], &[1.0, 1.0]),
            Err(Error::ImproperFilter { .. })
        ));
    }

    #[test]
    fn first_order_step_response() {
        let f = LtiFilter::first_order(1.0, 1.0).unwrap();
        let grid = TimeGrid::spanning(0.0, 3.0, 1e-3).unwrap();
        let ones = AnalyticSignal::constant(1.0).sample(&grid).unwrap();
        let out = f.apply(&ones, &[0.0]).unwrap();
        assert!((out.last() - (1.0 - (-3.0f64).exp())).abs() < 1e-6);
        assert!((out.last() - 0.950213).abs() < 1e-6);
    }

    #[test]
    fn zero_input_zero_state_is_zero() {
        let f = LtiFilter::new(&[2.0, 2.0], &[1.0, 1.0, 2.0]).unwrap();
        let grid = TimeGrid::new(0.0, 0.01, 500).unwrap();
        let out = f.apply(&Trajectory::zeros(grid), &[0.0, 0.0]).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_frequency_gain_without_phase_shift() {
        let c = 2.0;
        let f = LtiFilter::new(&[c, c], &[1.0, 1.0, 2.0]).unwrap();
        let grid = TimeGrid::spanning(0.0, 60.0, 1e-3).unwrap();
        let out = f
            .apply_signal(
                &Signal::Analytic(AnalyticSignal::sine()),
                &grid,
                &[0.0, 0.0],
            )
            .unwrap();
        let steady = grid.times().zip(out.values()).filter(|(t, _)| *t >= 40.0);
        let err = steady.fold(0.0f64, |acc, (t, v)| acc.max((v - c * t.sin()).abs()));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn dimension_mismatch() {
        let f = LtiFilter::first_order(1.0, 1.0).unwrap();
        let grid = TimeGrid::new(0.0, 0.1, 5).unwrap();
        assert!(matches!(
            f.apply(&Trajectory::zeros(grid), &[]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn static_gain_filter() {
        let f = LtiFilter::new(&[3.0], &[2.0]).unwrap();
        assert_eq!(f.order(), 0);
        let grid = TimeGrid::new(0.0, 0.1, 5).unwrap();
        let ones = AnalyticSignal::constant(1.0).sample(&grid).unwrap();
        assert!(f
            .apply(&ones, &[])
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 1.5));
    }

    #[test]
    fn serde_validates() {
        let ok: LtiFilter = serde_json::from_str(r#"{"num":[1.0],"den":[1.0,1.0]}"#).unwrap();
        assert_eq!(ok.order(), 1);
        assert!(serde_json::from_str::<LtiFilter>(r#"{"num":[1.0],"den":[1.0,-1.0]}"#).is_err());
    }
}
