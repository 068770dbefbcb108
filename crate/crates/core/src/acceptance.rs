//! The acceptance suite: every criterion as a function returning a
//! pass/fail outcome with the measured numbers.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fixtures;
use crate::harness::{builtin, builtin_names, is_deterministic, refinement_gap, run_scenario};
use crate::linear::{
    drem_closed_form_error, drem_extend, drem_simulate, gradient_simulate, pe_metric,
};
use crate::matalg::{self, Matrix};
use crate::nonlinear::{
    general_reduce, kappa_over, lyapunov_coefficient, monotone_estimator, scalar_reduce,
};
use crate::regression_gen::linearised_regression;
use crate::signals::{AnalyticSignal, Signal, TimeGrid, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{:>2}] {}: {}", self.id, self.name, self.detail)
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(u8, &str, Check); 14] = [
    (1, "adjugate identity", adjugate_identity),
    (2, "linear example energy", linear_energy),
    (3, "linear example decay factors", decay_factors),
    (4, "closed-form equivalence", closed_form_equivalence),
    (5, "baseline contrast", baseline_contrast),
    (6, "excitation metric", excitation_metric),
    (
        7,
        "unit-frequency counterexample",
        unit_frequency_counterexample,
    ),
    (8, "phi tracks -dg/dt", phi_tracks_rate),
    (9, "delay example divergence", delay_divergence),
    (10, "scalar monotone estimator", scalar_monotone),
    (11, "overparameterised baseline", overparam_baseline),
    (12, "general reduction", general_reduction),
    (13, "linearised regression", linearisation),
    (14, "harness invariants", harness_invariants),
];

pub fn run_criterion(id: u8) -> Option<Outcome> {
    CRITERIA
        .iter()
        .find(|(i, _, _)| *i == id)
        .map(|&(id, name, check)| {
            let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
            Outcome {
                id,
                name,
                passed,
                detail,
            }
        })
}

pub fn run_all() -> Vec<Outcome> {
    CRITERIA
        .iter()
        .filter_map(|(id, _, _)| run_criterion(*id))
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn adjugate_identity() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_u64);
    let mut worst = 0.0f64;
    for trial in 0..10_000 {
        let q = 1 + trial % 6;
        let mut data: Vec<f64> = (0..q * q).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if trial % 2 == 1 {
            if q == 1 {
                data[0] = 0.0;
            } else {
                let (src, dst) = (rng.gen_range(0..q), rng.gen_range(0..q - 1));
                let dst = if dst >= src { dst + 1 } else { dst };
                let row: Vec<f64> = data[src * q..(src + 1) * q].to_vec();
                data[dst * q..(dst + 1) * q].copy_from_slice(&row);
            }
        }
        let a = Matrix::from_row_major(q, q, data)?;
        let lhs = matalg::adjugate(&a)?.matmul(&a);
        let rhs = Matrix::identity(q).scale(matalg::determinant(&a)?);
        let ratio = lhs.sub(&rhs).max_abs() / (1e-8 * (1.0 + a.max_abs()).powi(q as i32));
        worst = worst.max(ratio);
    }
    Ok((
        worst <= 1.0,
        format!("worst residual / bound = {worst:.2e} over 10^4 matrices"),
    ))
}

fn linear_example(dt: f64, t_end: f64) -> Result<crate::linear::ExtendedRegression> {
    let grid = TimeGrid::spanning(0.0, t_end, dt)?;
    drem_extend(
        &fixtures::decaying_regression(),
        &[fixtures::unit_lag()],
        &grid,
    )
}

fn linear_energy() -> Result<(bool, String)> {
    let ext = linear_example(1e-3, 10.0)?;
    let e = matalg::l2_energy(ext.phi(), 0.0, 10.0)?;
    Ok((
        (e - 0.78).abs() <= 0.08,
        format!("energy over [0, 10] = {e:.5} (target 0.78 +- 0.08)"),
    ))
}

fn channel_ratios(gamma: f64) -> Result<Vec<f64>> {
    let ext = linear_example(1e-3, 10.0)?;
    let run = drem_simulate(&ext, &[gamma, gamma], &[0.0, 0.0])?;
    let tilde = run.theta_tilde.expect("simulated regression");
    Ok(tilde
        .iter()
        .map(|x| (x.last() / x.values()[0]).abs())
        .collect())
}

fn decay_factors() -> Result<(bool, String)> {
    let r3 = channel_ratios(3.0)?;
    let r10 = channel_ratios(10.0)?;
    let ok = r3.iter().all(|r| (0.06..=0.135).contains(r))
        && r10.iter().all(|r| (2e-4..=8e-4).contains(r));
    Ok((
        ok,
        format!(
            "gamma 3: {:.4} / {:.4}; gamma 10: {:.2e} / {:.2e}",
            r3[0], r3[1], r10[0], r10[1]
        ),
    ))
}

fn closed_form_equivalence() -> Result<(bool, String)> {
    let ext = linear_example(1e-4, 10.0)?;
    let mut worst = 0.0f64;
    for gamma in [3.0, 10.0] {
        let run = drem_simulate(&ext, &[gamma, gamma], &[0.0, 0.0])?;
        let tilde = run.theta_tilde.expect("simulated regression");
        let tilde0: Vec<f64> = tilde.iter().map(|x| x.values()[0]).collect();
        let closed = drem_closed_form_error(ext.phi(), &[gamma, gamma], &tilde0)?;
        for (a, b) in tilde.iter().zip(&closed) {
            worst = worst.max(max_abs_diff(a.values(), b.values()));
        }
    }
    Ok((
        worst <= 1e-6,
        format!("max discrepancy {worst:.2e} (dt = 1e-4, gains 3 and 10)"),
    ))
}

fn baseline_contrast() -> Result<(bool, String)> {
    let ext = linear_example(1e-3, 10.0)?;
    let drem = drem_simulate(&ext, &[3.0, 3.0], &[0.0, 0.0])?;
    let drem_ratio =
        drem.final_error_norm().expect("truth") / drem.error_norm_at(0).expect("truth");
    let grid = TimeGrid::spanning(0.0, 500.0, 1e-2)?;
    let grad = gradient_simulate(
        &fixtures::decaying_regression(),
        &Matrix::identity(2).scale(3.0),
        &[0.0, 0.0],
        &grid,
    )?;
    let grad_ratio =
        grad.final_error_norm().expect("truth") / grad.error_norm_at(0).expect("truth");
    Ok((
        drem_ratio <= 0.1 && grad_ratio >= 0.1,
        format!(
            "DREM |e(10)|/|e(0)| = {drem_ratio:.4}; gradient |e(500)|/|e(0)| = {grad_ratio:.4}"
        ),
    ))
}

fn excitation_metric() -> Result<(bool, String)> {
    let grid = TimeGrid::spanning(0.0, 40.0, 1e-3)?;
    let sc: Vec<Signal> = fixtures::sin_cos_regressor()
        .into_iter()
        .map(Signal::Analytic)
        .collect();
    let metric = pe_metric(&sc, 2.0 * PI, &grid)?;
    let sc_err = metric
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max((v - PI).abs()));

    let grid = TimeGrid::spanning(0.0, 400.0 + 2.0 * PI, 1e-2)?;
    let m: Vec<Signal> = fixtures::decaying_regressor()
        .into_iter()
        .map(Signal::Analytic)
        .collect();
    let metric = pe_metric(&m, 2.0 * PI, &grid)?;
    let at = |t: f64| metric.values()[metric.grid().nearest_index(t)];
    let periods: Vec<f64> = (0..)
        .map(|k| 2.0 * PI * k as f64)
        .take_while(|&t| t <= 400.0)
        .map(at)
        .collect();
    let decreasing = periods.windows(2).all(|w| w[1] < w[0]);
    let (first, last) = (metric.values()[0], metric.last());
    Ok((
        sc_err <= 1e-3 && decreasing && last < 0.02,
        format!(
            "sin/cos max |metric - pi| = {sc_err:.1e}; non-PE metric {first:.4} -> {last:.4}, strictly decreasing over {} periods: {decreasing}",
            periods.len()
        ),
    ))
}

fn unit_frequency_counterexample() -> Result<(bool, String)> {
    let grid = TimeGrid::spanning(0.0, 400.0, 1e-2)?;
    let reg =
        crate::linear::LinearRegression::simulated(fixtures::sin_cos_regressor(), &[1.0, 1.0])?;
    let ext = drem_extend(&reg, &[fixtures::unit_frequency_filter(2.0)?], &grid)?;
    let tail = grid
        .times()
        .zip(ext.phi().values())
        .filter(|(t, _)| *t >= 40.0)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let growth = matalg::l2_energy(ext.phi(), 200.0, 400.0)?;
    Ok((
        tail <= 1e-4 && growth <= 1e-3,
        format!("sup |phi| on t >= 40 = {tail:.2e}; E(400) - E(200) = {growth:.2e}"),
    ))
}

fn phi_tracks_rate() -> Result<(bool, String)> {
    let ext = linear_example(1e-3, 60.0)?;
    let limit = fixtures::decaying_phi_limit();
    let dev = ext
        .grid()
        .times()
        .zip(ext.phi().values())
        .filter(|(t, _)| *t >= 10.0)
        .fold(0.0f64, |m, (t, v)| m.max((v - limit.eval(t)).abs()));
    Ok((
        dev <= 1e-3,
        format!("max |phi + dg/dt| on [10, 60] = {dev:.2e}"),
    ))
}

fn delay_divergence() -> Result<(bool, String)> {
    let grid = TimeGrid::spanning(0.0, 800.0, 1e-2)?;
    let red = scalar_reduce(
        &fixtures::delay_example_regression(1.0),
        &fixtures::example_delay(),
        &grid,
    )?;
    let increments = [100.0, 200.0, 400.0]
        .iter()
        .map(|&t| matalg::l2_energy(red.det_phi(), t, 2.0 * t))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        increments.iter().all(|&d| d >= 0.5),
        format!(
            "E(2T) - E(T) = {:.3} / {:.3} / {:.3} for T = 100 / 200 / 400",
            increments[0], increments[1], increments[2]
        ),
    ))
}

fn scalar_monotone() -> Result<(bool, String)> {
    let rec = run_scenario(&builtin("monotone-scalar-gamma5")?)?.remove(0);
    let last = rec.row_count() - 1;
    let err = rec.prefixed("theta_tilde", last)[0].abs();
    let v = rec.column("V").expect("monotone record");
    let b = rec.column("V_bound").expect("monotone record");
    let worst = v
        .iter()
        .zip(b)
        .fold(f64::NEG_INFINITY, |m, (v, b)| m.max(v - b * (1.0 + 1e-6)));
    Ok((
        err <= 1e-2 && worst <= 0.0,
        format!("|e(100)| = {err:.2e}; max V - bound (1 + 1e-6) = {worst:.2e}"),
    ))
}

fn overparam_baseline() -> Result<(bool, String)> {
    let rec = run_scenario(&builtin("overparam-gamma3")?)?.remove(0);
    let e0 = rec.prefixed("eta_tilde", 0);
    let e_end = rec.prefixed("eta_tilde", rec.row_count() - 1);
    let norm_end = e_end.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ok = (e0[0] + 0.632).abs() <= 1e-3 && (e0[1] + 0.540).abs() <= 1e-3 && norm_end >= 0.05;
    Ok((
        ok,
        format!(
            "eta error at 0 = ({:.4}, {:.4}); |eta error(200)| = {norm_end:.4}",
            e0[0], e0[1]
        ),
    ))
}

fn general_reduction() -> Result<(bool, String)> {
    let grid = TimeGrid::spanning(0.0, 40.0, 1e-2)?;
    let reg = fixtures::vector_demo_regression(&fixtures::VECTOR_THETA)?;
    let cert = fixtures::vector_demo_certificate();
    let red = general_reduce(
        &reg,
        &[fixtures::unit_lag()],
        Some(&cert),
        Some(&[0]),
        &grid,
    )?;

    let m_sup = reg
        .regressor()
        .iter()
        .flatten()
        .map(|s| {
            s.sample(&grid)
                .map(|x| x.values().iter().fold(0.0f64, |m, v| m.max(v.abs())))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let tol = 1e-8 * (1.0 + m_sup.powi(3));
    let residual = red.identity_residual(&fixtures::VECTOR_THETA);
    let after = grid
        .times()
        .zip(residual.values())
        .filter(|(t, _)| *t >= 10.0)
        .fold(0.0f64, |m, (_, v)| m.max(*v));

    let theta0: Vec<f64> = fixtures::VECTOR_THETA
        .iter()
        .zip([0.15, -0.15])
        .map(|(a, b)| a + b)
        .collect();
    let gain = Matrix::identity(2);
    let run = monotone_estimator(&red, &cert, &gain, &theta0)?;
    let final_err = run.final_error_norm().expect("truth");
    let kappa = kappa_over(red.det_phi(), 10.0, grid.t_end());
    let predicted = lyapunov_coefficient(&cert, &gain)? * kappa;
    let v = run.diagnostics.lyapunov.as_ref().expect("truth");
    let (t1, t2) = (10.0, 30.0);
    let at = |x: &Trajectory, t: f64| x.values()[x.grid().nearest_index(t)];
    let measured = (at(v, t1).ln() - at(v, t2).ln()) / (t2 - t1);
    let ratio = measured / predicted;
    let ok = after <= tol && kappa > 0.0 && final_err < 1e-3 && (1.0 / 3.0..=3.0).contains(&ratio);
    Ok((
        ok,
        format!(
            "identity residual {after:.1e} (tol {tol:.1e}); |e(40)| = {final_err:.1e}; kappa = {kappa:.4}; V rate {measured:.4} vs predicted {predicted:.4} (ratio {ratio:.2})"
        ),
    ))
}

fn linearised_tail(amplitude: f64) -> Result<f64> {
    let grid = TimeGrid::spanning(0.0, 30.0, 1e-2)?;
    let (sys, x0) = fixtures::linearised_scalar(amplitude)?;
    let x = sys.simulate(&x0, &grid)?;
    let reg = linearised_regression(&sys, &x)?;
    let r = reg.residual(&[fixtures::LINEARISED_THETA]);
    Ok(grid
        .times()
        .zip(r.values())
        .filter(|(t, _)| *t >= 20.0)
        .fold(0.0f64, |m, (_, v)| m.max(*v)))
}

fn linearisation() -> Result<(bool, String)> {
    let ratio = linearised_tail(0.1)? / linearised_tail(0.05)?;

    let grid = TimeGrid::spanning(0.0, 5.0, 1e-2)?;
    let (sys, _) = fixtures::linearised_scalar(0.1)?;
    let x = vec![AnalyticSignal::constant(fixtures::LINEARISED_X_STAR).sample(&grid)?];
    let reg = linearised_regression(&sys, &x)?;
    let identity_block = reg.m[0][0].values().iter().all(|&v| v == 1.0)
        && reg.m[0][1].values().iter().all(|&v| v == 0.0);
    Ok((
        (3.4..=4.6).contains(&ratio) && identity_block,
        format!("residual ratio for amplitudes 0.1 / 0.05 = {ratio:.3}; m = [1 | 0] at x = x*: {identity_block}"),
    ))
}

fn harness_invariants() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for name in builtin_names() {
        let s = builtin(name)?;
        if !is_deterministic(&s)? {
            failures.push(format!("{name}: not deterministic"));
        }
        let (gap, limit) = refinement_gap(&s)?;
        worst = worst.max(gap / limit);
        if gap > limit {
            failures.push(format!("{name}: refinement gap {gap:.1e} > {limit:.1e}"));
        }
    }
    let n = builtin_names().count();
    if failures.is_empty() {
        Ok((
            true,
            format!(
                "{n} golden scenarios deterministic; worst refinement gap / limit = {worst:.1e}"
            ),
        ))
    } else {
        Ok((false, failures.join("; ")))
    }
}
