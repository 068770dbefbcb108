//! Classical fixed-step RK4, shared by every continuous-time component.
//!
//! Filters and estimators all step through [`rk4_integrate`], so a run is
//! fully determined by its grid: no adaptive control, no hidden state.

use crate::error::{Error, Result};
use crate::signals::{TimeGrid, Trajectory};

/// Sampled solution of a vector ODE, stored sample-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StateHistory {
    grid: TimeGrid,
    dim: usize,
    data: Vec<f64>,
}

impl StateHistory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.grid.len() - 1)
    }

    pub fn component(&self, i: usize) -> Trajectory {
        let values = (0..self.grid.len())
            .map(|k| self.data[k * self.dim + i])
            .collect();
        Trajectory::from_parts(self.grid, values)
    }

    pub fn components(&self) -> Vec<Trajectory> {
        (0..self.dim).map(|i| self.component(i)).collect()
    }
}

/// Scratch buffers for one RK4 step.
pub struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            stage: vec![0.0; dim],
        }
    }
}

/// Advances `x` from `t` to `t + h` in place.
///
/// `f(t, x, dx)` writes the vector field at `(t, x)` into `dx`.
pub fn rk4_step<F>(f: &mut F, t: f64, h: f64, x: &mut [f64], ws: &mut Rk4Workspace)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = x.len();
    f(t, x, &mut ws.k1);
    for i in 0..n {
        ws.stage[i] = x[i] + 0.5 * h * ws.k1[i];
    }
    f(t + 0.5 * h, &ws.stage, &mut ws.k2);
    for i in 0..n {
        ws.stage[i] = x[i] + 0.5 * h * ws.k2[i];
    }
    f(t + 0.5 * h, &ws.stage, &mut ws.k3);
    for i in 0..n {
        ws.stage[i] = x[i] + h * ws.k3[i];
    }
    f(t + h, &ws.stage, &mut ws.k4);
    for i in 0..n {
        x[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
}

/// Integrates `dx/dt = f(t, x)` from `x0` across every sample of `grid`.
///
/// Aborts with the offending sample index as soon as the state turns
/// non-finite.
pub fn rk4_integrate<F>(mut f: F, x0: &[f64], grid: &TimeGrid) -> Result<StateHistory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = x0.len();
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalAbort { sample: 0 });
    }
    let mut data = Vec::with_capacity(dim * grid.len());
    data.extend_from_slice(x0);
    let mut x = x0.to_vec();
    let mut ws = Rk4Workspace::new(dim);
    for k in 1..grid.len() {
        rk4_step(&mut f, grid.time(k - 1), grid.dt(), &mut x, &mut ws);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalAbort { sample: k });
        }
        data.extend_from_slice(&x);
    }
    Ok(StateHistory {
        grid: *grid,
        dim,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let grid = TimeGrid::new(0.0, 0.01, 101).unwrap();
        let sol = rk4_integrate(|_, x, dx| dx[0] = -x[0], &[1.0], &grid).unwrap();
        assert!((sol.last_state()[0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn zero_field_keeps_state() {
        let grid = TimeGrid::new(0.0, 0.1, 50).unwrap();
        let sol = rk4_integrate(|_, _, dx| dx.fill(0.0), &[1.5, -2.0], &grid).unwrap();
        for k in 0..grid.len() {
            assert_eq!(sol.state(k), &[1.5, -2.0]);
        }
    }

    #[test]
    fn forced_first_order_system() {
        // closed form 2 (1 - e^{-t})
        let grid = TimeGrid::spanning(0.0, 10.0, 1e-2).unwrap();
        let sol = rk4_integrate(|_, x, dx| dx[0] = -x[0] + 2.0, &[0.0], &grid).unwrap();
        let exact = 2.0 * (1.0 - (-10.0f64).exp());
        assert!((sol.last_state()[0] - exact).abs() < 1e-6);
        assert!((sol.last_state()[0] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn blow_up_aborts_with_sample_index() {
        let grid = TimeGrid::new(0.0, 0.5, 200).unwrap();
        let err = rk4_integrate(|_, x, dx| dx[0] = x[0] * x[0], &[10.0], &grid).unwrap_err();
        match err {
            Error::NumericalAbort { sample } => assert!(sample > 0 && sample < 200),
            other => panic!("unexpected {other:?}"),
        }
    }
}
