use super::{CertificateKind, FactorisableRegression, MonotoneCertificate, ReducedRegression};
use crate::error::{Error, Result};
use crate::harness::rk4::rk4_integrate;
use crate::linear::{lyapunov_trajectory, Diagnostics, EstimatorRun, Gains};
use crate::matalg::{self, Matrix};
use crate::signals::{TimeGrid, Trajectory};

fn check_gain(gain: &Matrix, dim: usize) -> Result<()> {
    if gain.rows() != dim || gain.cols() != dim {
        return Err(Error::Dimension(format!(
            "gain is {}x{}, expected {dim}x{dim}",
            gain.rows(),
            gain.cols()
        )));
    }
    matalg::ensure_positive_definite(gain)
}

/// Monotone gradient law `d/dt theta_hat = Gamma P det(Phi) [Y - det(Phi) psi_g(theta_hat)]`.
///
/// The field only involves `det(Phi) Y` and `det(Phi)^2`, which are smooth
/// even when the annihilator basis switches orientation between samples;
/// both are interpolated at the RK4 midpoints.
pub fn monotone_estimator(
    red: &ReducedRegression,
    cert: &MonotoneCertificate,
    gain: &Matrix,
    theta_hat0: &[f64],
) -> Result<EstimatorRun> {
    let q = red.q();
    let expected_kind = if q == 1 {
        CertificateKind::ScalarStrong
    } else {
        CertificateKind::PStrong
    };
    if cert.q() != q || cert.kind != expected_kind {
        return Err(Error::Dimension(format!(
            "{:?} certificate for {} parameters, regression has {q}",
            cert.kind,
            cert.q()
        )));
    }
    check_gain(gain, q)?;
    if theta_hat0.len() != q {
        return Err(Error::Dimension(format!(
            "initial estimate has length {}, expected {q}",
            theta_hat0.len()
        )));
    }
    let grid = *red.grid();
    let det = red.det_phi();
    let det_y: Vec<Trajectory> = red
        .mixed_output()
        .iter()
        .map(|y| {
            Trajectory::from_parts(
                grid,
                y.values()
                    .iter()
                    .zip(det.values())
                    .map(|(a, b)| a * b)
                    .collect(),
            )
        })
        .collect();
    let det_sq = det.map(|v| v * v);
    let gp = gain.matmul(&cert.p);
    let psi = red.psi_good();
    let mut err = vec![0.0; q];
    let history = rk4_integrate(
        |t, x, dx| {
            let d2 = det_sq.value_at(t);
            let g = psi.eval(x);
            for i in 0..q {
                err[i] = det_y[i].value_at(t) - d2 * g[i];
            }
            for (i, d) in dx.iter_mut().enumerate() {
                *d = (0..q).map(|j| gp[(i, j)] * err[j]).sum();
            }
        },
        theta_hat0,
        &grid,
    )?;
    let diagnostics = Diagnostics {
        excitation: Some(det.clone()),
        energy: Some(matalg::cumulative_energy(det)),
        ..Diagnostics::default()
    };
    let mut run = EstimatorRun::assemble(
        grid,
        history.components(),
        red.theta_true(),
        Gains::Matrix(gain.clone()),
        diagnostics,
    );
    if run.theta_tilde.is_some() {
        let report = lyapunov_bound(&run, cert, gain, det)?;
        run.diagnostics.lyapunov = Some(report.values);
        run.diagnostics.lyapunov_bound = Some(report.bound);
    }
    Ok(run)
}

/// Envelope `V(t) <= exp(-c int_0^t det^2 Phi) V(0)` for a monotone run.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    /// `V(t) = theta_tilde^T Gamma^{-1} theta_tilde / 2` along the run
    pub values: Trajectory,
    pub bound: Trajectory,
    /// decay coefficient `c` multiplying the excitation energy
    pub coefficient: f64,
    /// `inf det^2 Phi` over the horizon
    pub kappa_hat: f64,
    /// `c kappa_hat` when `kappa_hat > 0`
    pub rate: Option<f64>,
}

/// `inf det^2 Phi` over samples with `t_a <= t <= t_b`.
pub fn kappa_over(det_phi: &Trajectory, t_a: f64, t_b: f64) -> f64 {
    det_phi
        .grid()
        .times()
        .zip(det_phi.values())
        .filter(|(t, _)| (t_a..=t_b).contains(t))
        .fold(f64::INFINITY, |acc, (_, v)| acc.min(v * v))
}

/// Decay coefficient `2 rho1 min(lambda_min(Gamma), 1 / lambda_max(Gamma))`.
pub fn lyapunov_coefficient(cert: &MonotoneCertificate, gain: &Matrix) -> Result<f64> {
    let lo = matalg::min_eig_sym(gain)?;
    let hi = matalg::max_eig_sym(gain)?;
    Ok(2.0 * cert.rho1 * lo.min(1.0 / hi))
}

pub fn lyapunov_bound(
    run: &EstimatorRun,
    cert: &MonotoneCertificate,
    gain: &Matrix,
    det_phi: &Trajectory,
) -> Result<LyapunovReport> {
    let tilde = run
        .theta_tilde
        .as_ref()
        .ok_or_else(|| Error::Assumption("the Lyapunov bound needs the true parameters".into()))?;
    if det_phi.grid() != &run.grid || cert.q() != run.q() {
        return Err(Error::Dimension(
            "run, certificate and det(Phi) do not match".into(),
        ));
    }
    check_gain(gain, run.q())?;
    let values = lyapunov_trajectory(gain, tilde)?;
    let coefficient = lyapunov_coefficient(cert, gain)?;
    let v0 = values.values()[0];
    let bound = matalg::cumulative_energy(det_phi).map(|e| (-coefficient * e).exp() * v0);
    let kappa_hat = kappa_over(det_phi, f64::NEG_INFINITY, f64::INFINITY);
    Ok(LyapunovReport {
        values,
        bound,
        coefficient,
        kappa_hat,
        rate: (kappa_hat > 0.0).then_some(coefficient * kappa_hat),
    })
}

/// Linear estimator of `eta = psi(theta)`:
/// `d/dt eta_hat = Gamma m^T (y - m eta_hat)`. Errors are reported against
/// `psi(theta_true)`.
pub fn overparam_gradient(
    reg: &FactorisableRegression,
    gain: &Matrix,
    eta_hat0: &[f64],
    grid: &TimeGrid,
) -> Result<EstimatorRun> {
    let (n, p) = (reg.n(), reg.p());
    check_gain(gain, p)?;
    if eta_hat0.len() != p {
        return Err(Error::Dimension(format!(
            "initial estimate has length {}, expected {p}",
            eta_hat0.len()
        )));
    }
    for s in reg.regressor().iter().flatten().chain(reg.output()) {
        s.check_grid(grid)?;
    }
    let mut m = vec![0.0; n * p];
    let mut e = vec![0.0; n];
    let mut mt_e = vec![0.0; p];
    let history = rk4_integrate(
        |t, x, dx| {
            for (i, row) in reg.regressor().iter().enumerate() {
                for (j, s) in row.iter().enumerate() {
                    m[i * p + j] = s.value_at(t);
                }
                e[i] =
                    reg.output()[i].value_at(t) - (0..p).map(|j| m[i * p + j] * x[j]).sum::<f64>();
            }
            for j in 0..p {
                mt_e[j] = (0..n).map(|i| m[i * p + j] * e[i]).sum();
            }
            for (i, d) in dx.iter_mut().enumerate() {
                *d = (0..p).map(|j| gain[(i, j)] * mt_e[j]).sum();
            }
        },
        eta_hat0,
        grid,
    )?;
    let eta_true = reg.theta_true().map(|th| reg.psi().eval(th));
    let mut run = EstimatorRun::assemble(
        *grid,
        history.components(),
        eta_true.as_deref(),
        Gains::Matrix(gain.clone()),
        Diagnostics::default(),
    );
    if let Some(tilde) = &run.theta_tilde {
        run.diagnostics.lyapunov = Some(lyapunov_trajectory(gain, tilde)?);
    }
    Ok(run)
}
