//! Separable regressions from parameterised state equations
//! `dx/dt = F0(x, t) + F1(x, theta)`.
//!
//! Filtering with `1/(p + 1)` removes the need for `dx/dt`:
//! `y = x - 1/(p + 1) (x + F0(x, t))` equals `1/(p + 1) F1(x, theta)` up to a
//! decaying transient. Linearising the steady-state map `Xi(x, theta)`
//! around an operating point `x*` then gives
//! `y ~= [I_n | blockdiag(x_tilde^T)] [Xi*(theta); grad Xi_1*(theta); ...]`
//! with `x_tilde = x - x*` and a remainder quadratic in `x_tilde`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harness::rk4::rk4_integrate;
use crate::matalg::Matrix;
use crate::nonlinear::{FactorisableRegression, ParamMap};
use crate::signals::{Signal, TimeGrid, Trajectory};

type DriftFn = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;
type CouplingFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
type SteadyFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type SteadyGradFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// `dx/dt = F0(x, t) + F1(x, theta)` with an operating point `x*`.
///
/// `F0` may depend on time, which is how exogenous inputs enter.
#[derive(Clone)]
pub struct ParametrisedSystem {
    n: usize,
    q: usize,
    f0: DriftFn,
    f1: CouplingFn,
    x_star: Vec<f64>,
    xi_star: Option<SteadyFn>,
    grad_xi_star: Option<SteadyGradFn>,
    theta: Option<Vec<f64>>,
}

impl fmt::Debug for ParametrisedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametrisedSystem")
            .field("n", &self.n)
            .field("q", &self.q)
            .field("x_star", &self.x_star)
            .field(
                "steady_state_maps",
                &(self.xi_star.is_some() && self.grad_xi_star.is_some()),
            )
            .field("theta", &self.theta)
            .finish()
    }
}

impl ParametrisedSystem {
    pub fn new<F0, F1>(q: usize, x_star: Vec<f64>, f0: F0, f1: F1) -> Result<Self>
    where
        F0: Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
        F1: Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let n = x_star.len();
        if n == 0 || q == 0 {
            return Err(Error::Dimension(format!(
                "state dimension {n}, parameter dimension {q}"
            )));
        }
        Ok(Self {
            n,
            q,
            f0: Arc::new(f0),
            f1: Arc::new(f1),
            x_star,
            xi_star: None,
            grad_xi_star: None,
            theta: None,
        })
    }

    /// Supplies `Xi*(theta)` (length `n`) and the matrix whose row `i` is
    /// `grad_x Xi_i*(theta)`.
    pub fn with_steady_state<X, G>(mut self, xi_star: X, grad_xi_star: G) -> Self
    where
        X: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        self.xi_star = Some(Arc::new(xi_star));
        self.grad_xi_star = Some(Arc::new(grad_xi_star));
        self
    }

    pub fn with_theta(mut self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.q {
            return Err(Error::Dimension(format!(
                "{} parameters, expected {}",
                theta.len(),
                self.q
            )));
        }
        self.theta = Some(theta.to_vec());
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `p = n + n^2` columns of the linearised regression.
    pub fn p(&self) -> usize {
        self.n + self.n * self.n
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn theta_true(&self) -> Option<&[f64]> {
        self.theta.as_deref()
    }

    /// Integrates the state equation with the true parameters.
    pub fn simulate(&self, x0: &[f64], grid: &TimeGrid) -> Result<Vec<Trajectory>> {
        let theta = self
            .theta
            .clone()
            .ok_or_else(|| Error::Assumption("simulation needs the true parameters".into()))?;
        if x0.len() != self.n {
            return Err(Error::Dimension(format!(
                "initial state of length {}, expected {}",
                x0.len(),
                self.n
            )));
        }
        let history = rk4_integrate(
            |t, x, dx| {
                let a = (self.f0)(x, t);
                let b = (self.f1)(x, &theta);
                for i in 0..dx.len() {
                    dx[i] = a[i] + b[i];
                }
            },
            x0,
            grid,
        )?;
        Ok(history.components())
    }

    /// `[Xi*(theta); grad Xi_1*(theta); ...; grad Xi_n*(theta)]` as a map
    /// `R^q -> R^(n + n^2)`.
    pub fn steady_state_map(&self) -> Result<ParamMap> {
        let xi = self.xi_star.clone().ok_or(Error::MissingEvaluator("Xi*"))?;
        let grad = self
            .grad_xi_star
            .clone()
            .ok_or(Error::MissingEvaluator("grad Xi*"))?;
        let n = self.n;
        ParamMap::new("linearised", self.q, self.p(), move |th| {
            let mut out = xi(th);
            let g = grad(th);
            debug_assert_eq!((out.len(), g.rows(), g.cols()), (n, n, n));
            out.extend_from_slice(g.as_slice());
            out
        })
    }
}

fn check_bundle(sys: &ParametrisedSystem, x: &[Trajectory]) -> Result<TimeGrid> {
    if x.len() != sys.n {
        return Err(Error::Dimension(format!(
            "{} state trajectories, expected {}",
            x.len(),
            sys.n
        )));
    }
    let grid = *x[0].grid();
    if x.iter().any(|xi| xi.grid() != &grid) {
        return Err(Error::Dimension(
            "state trajectories on different grids".into(),
        ));
    }
    Ok(grid)
}

/// `y = x - 1/(p + 1) (x + F0(x, t))` with zero filter state.
pub fn filter_measurements(sys: &ParametrisedSystem, x: &[Trajectory]) -> Result<Vec<Trajectory>> {
    let grid = check_bundle(sys, x)?;
    let n = sys.n;
    let mut xt = vec![0.0; n];
    let history = rk4_integrate(
        |t, z, dz| {
            for (v, traj) in xt.iter_mut().zip(x) {
                *v = traj.value_at(t);
            }
            let drift = (sys.f0)(&xt, t);
            for i in 0..n {
                dz[i] = -z[i] + xt[i] + drift[i];
            }
        },
        &vec![0.0; n],
        &grid,
    )?;
    Ok(x.iter()
        .zip(history.components())
        .map(|(xi, zi)| {
            Trajectory::from_parts(
                grid,
                xi.values()
                    .iter()
                    .zip(zi.values())
                    .map(|(a, b)| a - b)
                    .collect(),
            )
        })
        .collect())
}

/// Linearised regression data `y ~= m psi(theta)` with `p = n + n^2`.
#[derive(Debug, Clone)]
pub struct LinearisedRegression {
    /// `n x p` regressor, one trajectory per entry
    pub m: Vec<Vec<Trajectory>>,
    pub y: Vec<Trajectory>,
    pub psi: ParamMap,
}

impl LinearisedRegression {
    /// Per-sample `max_i |y_i - (m psi(theta))_i|`.
    pub fn residual(&self, theta: &[f64]) -> Trajectory {
        let eta = self.psi.eval(theta);
        let grid = *self.y[0].grid();
        let values = (0..grid.len())
            .map(|k| {
                self.m.iter().zip(&self.y).fold(0.0f64, |acc, (row, y)| {
                    let fit: f64 = row
                        .iter()
                        .zip(&eta)
                        .map(|(mij, e)| mij.values()[k] * e)
                        .sum();
                    acc.max((y.values()[k] - fit).abs())
                })
            })
            .collect();
        Trajectory::from_parts(grid, values)
    }

    /// Hands the data to the nonlinear reduction with the given good columns.
    pub fn into_factorisable(self, good_indices: &[usize]) -> Result<FactorisableRegression> {
        let m = self
            .m
            .into_iter()
            .map(|row| row.into_iter().map(Signal::Sampled).collect())
            .collect();
        let y = self.y.into_iter().map(Signal::Sampled).collect();
        FactorisableRegression::from_measurements(m, y, self.psi, good_indices)
    }
}

/// Builds `m = [I_n | blockdiag(x_tilde^T, ..., x_tilde^T)]`, the filtered
/// output and the stacked steady-state map.
pub fn linearised_regression(
    sys: &ParametrisedSystem,
    x: &[Trajectory],
) -> Result<LinearisedRegression> {
    let psi = sys.steady_state_map()?;
    let grid = check_bundle(sys, x)?;
    let y = filter_measurements(sys, x)?;
    let (n, p) = (sys.n, sys.p());
    let x_tilde: Vec<Trajectory> = x
        .iter()
        .zip(&sys.x_star)
        .map(|(xi, s)| xi.map(|v| v - s))
        .collect();
    let m = (0..n)
        .map(|i| {
            (0..p)
                .map(|j| {
                    if j < n {
                        Trajectory::from_parts(
                            grid,
                            vec![if i == j { 1.0 } else { 0.0 }; grid.len()],
                        )
                    } else if (j - n) / n == i {
                        x_tilde[(j - n) % n].clone()
                    } else {
                        Trajectory::zeros(grid)
                    }
                })
                .collect()
        })
        .collect();
    Ok(LinearisedRegression { m, y, psi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relaxation(theta: f64) -> ParametrisedSystem {
        ParametrisedSystem::new(1, vec![0.0], |x, _| vec![-x[0]], |_, th| vec![th[0]])
            .unwrap()
            .with_theta(&[theta])
            .unwrap()
    }

    #[test]
    fn filtered_output_tracks_parameter() {
        let sys = relaxation(2.0);
        let grid = TimeGrid::spanning(0.0, 20.0, 1e-3).unwrap();
        let x = sys.simulate(&[0.0], &grid).unwrap();
        let y = filter_measurements(&sys, &x).unwrap();
        // x = theta (1 - e^{-t}) and y = x
        for (t, v) in grid.times().zip(y[0].values()) {
            assert!((v - 2.0 * (1.0 - (-t).exp())).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_state_gives_zero_output() {
        let sys = ParametrisedSystem::new(
            1,
            vec![0.0],
            |x, _| vec![-x[0].powi(3)],
            |x, th| vec![th[0] * x[0].sin()],
        )
        .unwrap();
        let grid = TimeGrid::spanning(0.0, 5.0, 1e-2).unwrap();
        let y = filter_measurements(&sys, &[Trajectory::zeros(grid)]).unwrap();
        assert!(y[0].values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_states_give_six_columns() {
        let sys = ParametrisedSystem::new(
            1,
            vec![0.5, -0.5],
            |x, _| vec![-x[0], -x[1]],
            |x, th| vec![th[0] * x[1], 0.0],
        )
        .unwrap()
        .with_steady_state(
            |th| vec![-0.5 * th[0], 0.0],
            |th| Matrix::from_rows(&[[0.0, th[0]], [0.0, 0.0]]).unwrap(),
        );
        assert_eq!(sys.p(), 6);
        let grid = TimeGrid::spanning(0.0, 1.0, 1e-2).unwrap();
        let x: Vec<Trajectory> = [0.5, -0.5]
            .iter()
            .map(|&c| Trajectory::zeros(grid).map(|_| c))
            .collect();
        let reg = linearised_regression(&sys, &x).unwrap();
        assert_eq!((reg.m.len(), reg.m[0].len()), (2, 6));
        let expected = [
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        ];
        for (row, exp) in reg.m.iter().zip(expected) {
            for (entry, e) in row.iter().zip(exp) {
                assert!(entry.values().iter().all(|&v| v == e));
            }
        }
        assert_eq!(reg.psi.eval(&[2.0]), vec![-1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn missing_evaluators_reported() {
        let sys = relaxation(1.0);
        let grid = TimeGrid::spanning(0.0, 1.0, 1e-2).unwrap();
        let x = sys.simulate(&[0.0], &grid).unwrap();
        assert!(matches!(
            linearised_regression(&sys, &x),
            Err(Error::MissingEvaluator(_))
        ));
    }

    #[test]
    fn block_layout_follows_state_deviation() {
        let sys = ParametrisedSystem::new(
            1,
            vec![1.0, 2.0],
            |x, _| vec![-x[0], -x[1]],
            |_, _| vec![0.0, 0.0],
        )
        .unwrap()
        .with_steady_state(|_| vec![0.0, 0.0], |_| Matrix::zeros(2, 2));
        let grid = TimeGrid::spanning(0.0, 1.0, 0.5).unwrap();
        let x = vec![
            Trajectory::zeros(grid).map(|_| 1.5),
            Trajectory::zeros(grid).map(|_| 1.0),
        ];
        let reg = linearised_regression(&sys, &x).unwrap();
        let row = |i: usize| -> Vec<f64> { reg.m[i].iter().map(|e| e.values()[0]).collect() };
        assert_eq!(row(0), vec![1.0, 0.0, 0.5, -1.0, 0.0, 0.0]);
        assert_eq!(row(1), vec![0.0, 1.0, 0.0, 0.0, 0.5, -1.0]);
    }
}
