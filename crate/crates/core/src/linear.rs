//! Linear regressions `y(t) = m(t)^T theta`.
//!
//! Two estimators live here: the classical gradient law
//! `d/dt theta_hat = Gamma m (y - m^T theta_hat)`, whose convergence hinges on
//! persistency of excitation, and the DREM construction, which stacks `q - 1`
//! filtered copies of the regression into a square system, mixes it with the
//! adjugate, and estimates every parameter from its own scalar regression
//! `Y_i = phi theta_i` with `phi = det M_e`.

use crate::error::{Error, Result};
use crate::harness::rk4::rk4_integrate;
use crate::matalg::{self, Matrix};
use crate::signals::{AnalyticSignal, Signal, SignalOperator, TimeGrid, Trajectory};

/// `y = m^T theta` with a scalar output.
#[derive(Debug, Clone)]
pub struct LinearRegression {
    regressor: Vec<Signal>,
    output: Signal,
    theta: Option<Vec<f64>>,
}

impl LinearRegression {
    /// Simulation setup: the output is built from the regressor and the true
    /// parameters, so the regression holds exactly.
    pub fn simulated(regressor: Vec<AnalyticSignal>, theta: &[f64]) -> Result<Self> {
        if regressor.len() != theta.len() || theta.is_empty() {
            return Err(Error::Dimension(format!(
                "{} regressor components for {} parameters",
                regressor.len(),
                theta.len()
            )));
        }
        let output = AnalyticSignal::linear_combination(&regressor, theta);
        Ok(Self {
            regressor: regressor.into_iter().map(Signal::Analytic).collect(),
            output: Signal::Analytic(output),
            theta: Some(theta.to_vec()),
        })
    }

    /// Measured data without ground truth.
    pub fn from_measurements(regressor: Vec<Signal>, output: Signal) -> Result<Self> {
        if regressor.is_empty() {
            return Err(Error::Dimension("empty regressor".into()));
        }
        Ok(Self {
            regressor,
            output,
            theta: None,
        })
    }

    pub fn q(&self) -> usize {
        self.regressor.len()
    }

    pub fn regressor(&self) -> &[Signal] {
        &self.regressor
    }

    pub fn output(&self) -> &Signal {
        &self.output
    }

    pub fn theta_true(&self) -> Option<&[f64]> {
        self.theta.as_deref()
    }
}

/// Adaptation gains of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Gains {
    Matrix(Matrix),
    PerChannel(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// `phi` for linear DREM, `det Phi` for the monotone estimators.
    pub excitation: Option<Trajectory>,
    /// Running integral of the squared excitation.
    pub energy: Option<Trajectory>,
    pub lyapunov: Option<Trajectory>,
    pub lyapunov_bound: Option<Trajectory>,
}

/// Estimate trajectories of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRun {
    pub grid: TimeGrid,
    pub theta_hat: Vec<Trajectory>,
    /// `theta_hat - theta_true`, when the truth is known.
    pub theta_tilde: Option<Vec<Trajectory>>,
    pub gains: Gains,
    pub diagnostics: Diagnostics,
}

impl EstimatorRun {
    pub(crate) fn assemble(
        grid: TimeGrid,
        theta_hat: Vec<Trajectory>,
        truth: Option<&[f64]>,
        gains: Gains,
        diagnostics: Diagnostics,
    ) -> Self {
        let theta_tilde = truth.map(|theta| {
            theta_hat
                .iter()
                .zip(theta)
                .map(|(est, &th)| est.map(|v| v - th))
                .collect()
        });
        Self {
            grid,
            theta_hat,
            theta_tilde,
            gains,
            diagnostics,
        }
    }

    pub fn q(&self) -> usize {
        self.theta_hat.len()
    }

    /// `|theta_tilde(t_k)|` at sample `k`.
    pub fn error_norm_at(&self, k: usize) -> Option<f64> {
        self.theta_tilde
            .as_ref()
            .map(|tt| tt.iter().map(|x| x.values()[k].powi(2)).sum::<f64>().sqrt())
    }

    pub fn final_error_norm(&self) -> Option<f64> {
        self.error_norm_at(self.grid.len() - 1)
    }

    pub fn error_norm(&self) -> Option<Trajectory> {
        let n = self.grid.len();
        let values = (0..n)
            .map(|k| self.error_norm_at(k))
            .collect::<Option<Vec<_>>>()?;
        Some(Trajectory::from_parts(self.grid, values))
    }
}

/// `v^T A^{-1} v` for symmetric positive definite `A`, via the adjugate.
pub(crate) fn inverse_quadratic_form(a: &Matrix, v: &[f64]) -> Result<f64> {
    let adj = matalg::adjugate(a)?;
    let det = matalg::determinant(a)?;
    let w = adj.mul_vec(v);
    Ok(v.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() / det)
}

fn check_gain_matrix(gain: &Matrix, dim: usize) -> Result<()> {
    if gain.rows() != dim || gain.cols() != dim {
        return Err(Error::Dimension(format!(
            "gain is {}x{}, expected {dim}x{dim}",
            gain.rows(),
            gain.cols()
        )));
    }
    matalg::ensure_positive_definite(gain)
}

/// Lyapunov values `V = theta_tilde^T Gamma^{-1} theta_tilde / 2`.
pub(crate) fn lyapunov_trajectory(gain: &Matrix, tilde: &[Trajectory]) -> Result<Trajectory> {
    let grid = *tilde[0].grid();
    let mut values = Vec::with_capacity(grid.len());
    let mut v = vec![0.0; tilde.len()];
    for k in 0..grid.len() {
        for (i, x) in tilde.iter().enumerate() {
            v[i] = x.values()[k];
        }
        values.push(0.5 * inverse_quadratic_form(gain, &v)?);
    }
    Trajectory::new(grid, values)
}

/// Gradient estimator `d/dt theta_hat = Gamma m (y - m^T theta_hat)`.
pub fn gradient_simulate(
    reg: &LinearRegression,
    gain: &Matrix,
    theta_hat0: &[f64],
    grid: &TimeGrid,
) -> Result<EstimatorRun> {
    let q = reg.q();
    check_gain_matrix(gain, q)?;
    if theta_hat0.len() != q {
        return Err(Error::Dimension(format!(
            "initial estimate has length {}, expected {q}",
            theta_hat0.len()
        )));
    }
    for s in reg.regressor.iter().chain(std::iter::once(&reg.output)) {
        s.check_grid(grid)?;
    }
    let mut m = vec![0.0; q];
    let history = rk4_integrate(
        |t, x, dx| {
            for (mi, s) in m.iter_mut().zip(&reg.regressor) {
                *mi = s.value_at(t);
            }
            let residual =
                reg.output.value_at(t) - m.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            for (i, d) in dx.iter_mut().enumerate() {
                *d = (0..q).map(|j| gain[(i, j)] * m[j]).sum::<f64>() * residual;
            }
        },
        theta_hat0,
        grid,
    )?;
    let mut run = EstimatorRun::assemble(
        *grid,
        history.components(),
        reg.theta_true(),
        Gains::Matrix(gain.clone()),
        Diagnostics::default(),
    );
    if let Some(tilde) = &run.theta_tilde {
        run.diagnostics.lyapunov = Some(lyapunov_trajectory(gain, tilde)?);
    }
    Ok(run)
}

/// Sliding-window excitation level of a (possibly matrix-valued) regressor.
///
/// For each window start `t_k` with `t_k + T` inside the grid, returns
/// `lambda_min( integral_{t_k}^{t_k + T} m(s)^T m(s) ds )` (trapezoidal). The
/// infimum of the result estimates the excitation level `delta`; a value
/// that tends to zero signals a regressor that is not persistently exciting.
pub fn pe_metric_samples(samples: &[Matrix], grid: &TimeGrid, window: f64) -> Result<Trajectory> {
    if !(window > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "window must be positive, got {window}"
        )));
    }
    if samples.len() != grid.len() {
        return Err(Error::Dimension(
            "one regressor sample per grid point expected".into(),
        ));
    }
    let w = (window / grid.dt()).round() as usize;
    if w == 0 || w + 2 > grid.len() {
        return Err(Error::Interval {
            from: grid.t0(),
            to: grid.t0() + window,
            start: grid.t0(),
            end: grid.t_end(),
        });
    }
    let p = samples[0].cols();
    let dt = grid.dt();
    let grams: Vec<Matrix> = samples.iter().map(|m| m.transpose().matmul(m)).collect();
    let mut cumulative = Vec::with_capacity(grid.len());
    let mut acc = Matrix::zeros(p, p);
    cumulative.push(acc.clone());
    for pair in grams.windows(2) {
        acc = acc.add(&pair[0].add(&pair[1]).scale(0.5 * dt));
        cumulative.push(acc.clone());
    }
    let count = grid.len() - w;
    let out_grid = TimeGrid::new(grid.t0(), dt, count)?;
    let values = (0..count)
        .map(|k| matalg::min_eig_sym(&cumulative[k + w].sub(&cumulative[k])))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(out_grid, values)
}

/// [`pe_metric_samples`] for a vector regressor `m(t)` in `R^q`.
pub fn pe_metric(regressor: &[Signal], window: f64, grid: &TimeGrid) -> Result<Trajectory> {
    let sampled = regressor
        .iter()
        .map(|s| s.sample(grid))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<Matrix> = (0..grid.len())
        .map(|k| {
            Matrix::from_row_major(
                1,
                sampled.len(),
                sampled.iter().map(|x| x.values()[k]).collect(),
            )
        })
        .collect::<Result<_>>()?;
    pe_metric_samples(&samples, grid, window)
}

/// Extended and mixed regression, materialised on a grid.
#[derive(Debug, Clone)]
pub struct ExtendedRegression {
    grid: TimeGrid,
    operators: Vec<SignalOperator>,
    /// `[y; y_f1; ...; y_f(q-1)]`, one trajectory per row
    ye: Vec<Trajectory>,
    /// `M_e(t_k)` per sample
    me: Vec<Matrix>,
    phi: Trajectory,
    /// `Y = adj(M_e) Y_e`, one trajectory per parameter
    mixed: Vec<Trajectory>,
    theta: Option<Vec<f64>>,
}

impl ExtendedRegression {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn q(&self) -> usize {
        self.mixed.len()
    }

    pub fn operators(&self) -> &[SignalOperator] {
        &self.operators
    }

    pub fn extended_output(&self) -> &[Trajectory] {
        &self.ye
    }

    pub fn extended_regressor(&self) -> &[Matrix] {
        &self.me
    }

    pub fn phi(&self) -> &Trajectory {
        &self.phi
    }

    pub fn mixed(&self) -> &[Trajectory] {
        &self.mixed
    }

    pub fn theta_true(&self) -> Option<&[f64]> {
        self.theta.as_deref()
    }
}

/// Builds `Y_e`, `M_e` from the regression and `q - 1` operators, then mixes
/// them into `phi = det M_e` and `Y = adj(M_e) Y_e`.
pub fn drem_extend(
    reg: &LinearRegression,
    operators: &[SignalOperator],
    grid: &TimeGrid,
) -> Result<ExtendedRegression> {
    let q = reg.q();
    if operators.len() + 1 != q {
        return Err(Error::Dimension(format!(
            "{q} parameters need {} operators, got {}",
            q - 1,
            operators.len()
        )));
    }
    let mut m_rows: Vec<Vec<Trajectory>> = vec![reg
        .regressor
        .iter()
        .map(|s| s.sample(grid))
        .collect::<Result<_>>()?];
    let mut ye = vec![reg.output.sample(grid)?];
    for op in operators {
        m_rows.push(
            reg.regressor
                .iter()
                .map(|s| op.apply(s, grid))
                .collect::<Result<_>>()?,
        );
        ye.push(op.apply(&reg.output, grid)?);
    }

    let n = grid.len();
    let mut me = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut mixed: Vec<Vec<f64>> = vec![Vec::with_capacity(n); q];
    let mut ye_k = vec![0.0; q];
    for k in 0..n {
        let data = m_rows
            .iter()
            .flat_map(|row| row.iter().map(move |x| x.values()[k]))
            .collect();
        let mk = Matrix::from_row_major(q, q, data)?;
        for (i, y) in ye.iter().enumerate() {
            ye_k[i] = y.values()[k];
        }
        let adj = matalg::adjugate(&mk)?;
        phi.push(matalg::determinant(&mk)?);
        for (i, v) in adj.mul_vec(&ye_k).into_iter().enumerate() {
            mixed[i].push(v);
        }
        me.push(mk);
    }
    Ok(ExtendedRegression {
        grid: *grid,
        operators: operators.to_vec(),
        ye,
        me,
        phi: Trajectory::new(*grid, phi)?,
        mixed: mixed
            .into_iter()
            .map(|v| Trajectory::new(*grid, v))
            .collect::<Result<_>>()?,
        theta: reg.theta.clone(),
    })
}

/// Decoupled scalar estimators `d/dt theta_hat_i = gamma_i phi (Y_i - phi theta_hat_i)`.
pub fn drem_simulate(
    ext: &ExtendedRegression,
    gains: &[f64],
    theta_hat0: &[f64],
) -> Result<EstimatorRun> {
    let q = ext.q();
    if gains.len() != q || theta_hat0.len() != q {
        return Err(Error::Dimension(format!(
            "expected {q} gains and initial estimates"
        )));
    }
    if let Some(&g) = gains.iter().find(|&&g| !(g > 0.0)) {
        return Err(Error::NonPositiveGain(g));
    }
    let phi = &ext.phi;
    let theta_hat = (0..q)
        .map(|i| {
            let (gamma, y) = (gains[i], &ext.mixed[i]);
            let h = rk4_integrate(
                |t, x, dx| {
                    let p = phi.value_at(t);
                    dx[0] = gamma * p * (y.value_at(t) - p * x[0]);
                },
                &[theta_hat0[i]],
                &ext.grid,
            )?;
            Ok(h.component(0))
        })
        .collect::<Result<Vec<_>>>()?;
    let diagnostics = Diagnostics {
        excitation: Some(phi.clone()),
        energy: Some(matalg::cumulative_energy(phi)),
        ..Diagnostics::default()
    };
    Ok(EstimatorRun::assemble(
        ext.grid,
        theta_hat,
        ext.theta_true(),
        Gains::PerChannel(gains.to_vec()),
        diagnostics,
    ))
}

/// Exact error of the decoupled estimators driven by `phi`:
/// `theta_tilde_i(t) = exp(-gamma_i integral_0^t phi^2) theta_tilde_i(0)`.
pub fn drem_closed_form_error(
    phi: &Trajectory,
    gains: &[f64],
    theta_tilde0: &[f64],
) -> Result<Vec<Trajectory>> {
    if gains.len() != theta_tilde0.len() {
        return Err(Error::Dimension(format!(
            "{} gains for {} channels",
            gains.len(),
            theta_tilde0.len()
        )));
    }
    let energy = matalg::cumulative_energy(phi);
    Ok(gains
        .iter()
        .zip(theta_tilde0)
        .map(|(&g, &e0)| energy.map(|e| (-g * e).exp() * e0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sincos() -> Vec<AnalyticSignal> {
        vec![AnalyticSignal::sine(), AnalyticSignal::cosine()]
    }

    #[test]
    fn zero_regressor_freezes_gradient_estimate() {
        let reg = LinearRegression::simulated(vec![AnalyticSignal::constant(0.0); 2], &[1.0, -2.0])
            .unwrap();
        let grid = TimeGrid::spanning(0.0, 5.0, 1e-2).unwrap();
        let run = gradient_simulate(&reg, &Matrix::identity(2), &[0.3, 0.4], &grid).unwrap();
        for th in &run.theta_hat {
            assert!(th.values().iter().all(|&v| v == th.values()[0]));
        }
    }

    #[test]
    fn gradient_rejects_indefinite_gain() {
        let reg = LinearRegression::simulated(sincos(), &[1.0, 1.0]).unwrap();
        let grid = TimeGrid::spanning(0.0, 1.0, 1e-2).unwrap();
        let bad = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            gradient_simulate(&reg, &bad, &[0.0, 0.0], &grid),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn pe_metric_of_quadrature_pair_is_pi() {
        let grid = TimeGrid::spanning(0.0, 30.0, 1e-3).unwrap();
        let m: Vec<Signal> = sincos().into_iter().map(Signal::Analytic).collect();
        let metric = pe_metric(&m, 2.0 * PI, &grid).unwrap();
        assert!(metric.values().iter().all(|v| (v - PI).abs() < 1e-3));
    }

    #[test]
    fn pe_metric_of_rank_one_regressor_is_zero() {
        let grid = TimeGrid::spanning(0.0, 10.0, 1e-2).unwrap();
        let m = vec![
            Signal::Analytic(AnalyticSignal::constant(1.0)),
            Signal::Analytic(AnalyticSignal::constant(0.0)),
        ];
        let metric = pe_metric(&m, 1.5, &grid).unwrap();
        assert!(metric.values().iter().all(|v| v.abs() < 1e-12));
        assert!(pe_metric(&m, 11.0, &grid).is_err());
    }

    #[test]
    fn drem_operator_count_checked() {
        let reg = LinearRegression::simulated(sincos(), &[1.0, 1.0]).unwrap();
        let grid = TimeGrid::spanning(0.0, 1.0, 1e-2).unwrap();
        assert!(matches!(
            drem_extend(&reg, &[], &grid),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn pass_through_operator_gives_zero_phi() {
        let reg = LinearRegression::simulated(sincos(), &[1.0, 1.0]).unwrap();
        let grid = TimeGrid::spanning(0.0, 5.0, 1e-2).unwrap();
        let ext = drem_extend(&reg, &[SignalOperator::delay(0.0).unwrap()], &grid).unwrap();
        assert!(ext.phi().values().iter().all(|&v| v == 0.0));
        let run = drem_simulate(&ext, &[3.0, 3.0], &[0.5, -0.5]).unwrap();
        for (th, x0) in run.theta_hat.iter().zip([0.5, -0.5]) {
            assert!(th.values().iter().all(|&v| v == x0));
        }
    }

    #[test]
    fn drem_rejects_non_positive_gain() {
        let reg = LinearRegression::simulated(sincos(), &[1.0, 1.0]).unwrap();
        let grid = TimeGrid::spanning(0.0, 1.0, 1e-2).unwrap();
        let ext = drem_extend(
            &reg,
            &[SignalOperator::first_order(1.0, 1.0).unwrap()],
            &grid,
        )
        .unwrap();
        assert!(matches!(
            drem_simulate(&ext, &[3.0, 0.0], &[0.0, 0.0]),
            Err(Error::NonPositiveGain(_))
        ));
    }

    #[test]
    fn closed_form_without_adaptation_is_constant() {
        let grid = TimeGrid::spanning(0.0, 5.0, 1e-2).unwrap();
        let phi = AnalyticSignal::sine().sample(&grid).unwrap();
        let err = drem_closed_form_error(&phi, &[0.0], &[2.5]).unwrap();
        assert!(err[0].values().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn closed_form_decay_factor() {
        // energy 0.78 with gamma 3 gives e^{-2.34}
        let grid = TimeGrid::spanning(0.0, 10.0, 1e-3).unwrap();
        let level = (0.78f64 / 10.0).sqrt();
        let phi = AnalyticSignal::constant(level).sample(&grid).unwrap();
        let err = drem_closed_form_error(&phi, &[3.0], &[1.0]).unwrap();
        assert!((err[0].last() - (-2.34f64).exp()).abs() < 1e-12);
        assert!((err[0].last() - 0.0963).abs() < 1e-4);
    }

    #[test]
    fn inverse_quadratic_form_matches_diagonal() {
        let g = Matrix::diagonal(&[2.0, 4.0]);
        assert!((inverse_quadratic_form(&g, &[2.0, 2.0]).unwrap() - 3.0).abs() < 1e-15);
    }
}
