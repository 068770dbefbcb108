//! Dispatches a validated scenario to the estimation modules and tabulates
//! the result.

use std::f64::consts::PI;

use super::record::{to_csv_string, RunRecord};
use super::scenario::{RegressorSource, Scenario, ScenarioKind};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::linear::{
    drem_extend, drem_simulate, gradient_simulate, pe_metric, EstimatorRun, ExtendedRegression,
    LinearRegression,
};
use crate::matalg::Matrix;
use crate::nonlinear::{
    check_monotone, general_reduce, monotone_estimator, overparam_gradient, scalar_reduce,
};
use crate::nonlinear::{FactorisableRegression, MonotoneCertificate, ReducedRegression};
use crate::regression_gen::linearised_regression;
use crate::signals::{Signal, TimeGrid};

enum Prepared {
    Gradient(LinearRegression),
    Drem(ExtendedRegression),
    Overparam(FactorisableRegression),
    Monotone(ReducedRegression, MonotoneCertificate),
}

/// Initial estimates of a run or a sweep.
pub fn initial_estimates(s: &Scenario) -> Vec<Vec<f64>> {
    let centre = s.theta_hat0.clone().unwrap_or_default();
    match s.sweep {
        Some(sw) if sw.radius > 0.0 && sw.count > 0 => (0..sw.count)
            .map(|k| match centre.len() {
                1 if sw.count == 1 => centre.clone(),
                1 => {
                    vec![centre[0] - sw.radius + 2.0 * sw.radius * k as f64 / (sw.count - 1) as f64]
                }
                _ => {
                    let a = 2.0 * PI * k as f64 / sw.count as f64;
                    vec![
                        centre[0] + sw.radius * a.cos(),
                        centre[1] + sw.radius * a.sin(),
                    ]
                }
            })
            .collect(),
        _ => vec![centre],
    }
}

fn certificate(s: &Scenario, reg: &FactorisableRegression) -> Result<MonotoneCertificate> {
    let spec = s.monotone.as_ref().expect("validated");
    let p = match &spec.p_matrix {
        Some(rows) => Matrix::from_rows(rows)?,
        None => Matrix::identity(reg.q()),
    };
    check_monotone(&reg.psi_good(), &p, &spec.domain, spec.samples)
}

fn prepare(s: &Scenario, src: &RegressorSource, grid: &TimeGrid) -> Result<Prepared> {
    let theta = s.theta_true.as_deref().expect("validated");
    Ok(match (s.kind, src) {
        (ScenarioKind::GradientLinear, RegressorSource::Linear(m)) => {
            Prepared::Gradient(LinearRegression::simulated(m.clone(), theta)?)
        }
        (ScenarioKind::DremLinear, RegressorSource::Linear(m)) => Prepared::Drem(drem_extend(
            &LinearRegression::simulated(m.clone(), theta)?,
            &s.operators,
            grid,
        )?),
        (kind, RegressorSource::Factorisable { m, psi, good }) => {
            let reg = FactorisableRegression::simulated(m.clone(), psi.clone(), good, theta)?;
            match kind {
                ScenarioKind::OverparamNonlinear => Prepared::Overparam(reg),
                ScenarioKind::DremScalarMonotone => {
                    let cert = certificate(s, &reg)?;
                    Prepared::Monotone(scalar_reduce(&reg, &s.operators[0], grid)?, cert)
                }
                _ => {
                    let cert = certificate(s, &reg)?;
                    let red = general_reduce(
                        &reg,
                        &s.operators,
                        Some(&cert),
                        s.filtered_rows.as_deref(),
                        grid,
                    )?;
                    Prepared::Monotone(red, cert)
                }
            }
        }
        _ => unreachable!("kind and regressor family checked by validate"),
    })
}

fn names(prefix: &str, q: usize) -> impl Iterator<Item = String> + '_ {
    (1..=q).map(move |i| format!("{prefix}_{i}"))
}

fn estimator_record(
    s: &Scenario,
    run: &EstimatorRun,
    theta_hat0: &[f64],
    estimate: &str,
) -> Result<RunRecord> {
    let q = run.q();
    let mut columns = vec!["t".to_string()];
    let mut data = vec![run.grid.times().collect::<Vec<_>>()];
    columns.extend(names(&format!("{estimate}_hat"), q));
    data.extend(run.theta_hat.iter().map(|x| x.values().to_vec()));
    if let Some(tilde) = &run.theta_tilde {
        columns.extend(names(&format!("{estimate}_tilde"), q));
        data.extend(tilde.iter().map(|x| x.values().to_vec()));
    }
    let d = &run.diagnostics;
    for (name, col) in [
        ("phi", &d.excitation),
        ("energy", &d.energy),
        ("V", &d.lyapunov),
        ("V_bound", &d.lyapunov_bound),
    ] {
        if let Some(x) = col {
            columns.push(name.into());
            data.push(x.values().to_vec());
        }
    }
    let mut config = s.clone();
    config.theta_hat0 = Some(theta_hat0.to_vec());
    config.sweep = None;
    let mut rec = RunRecord::new(config, columns, data)?;
    if let (Some(e0), Some(e1)) = (run.error_norm_at(0), run.final_error_norm()) {
        rec.summary.push(("initial_error_norm".into(), e0));
        rec.summary.push(("final_error_norm".into(), e1));
        if e0 > 0.0 {
            rec.summary.push(("decay_factor".into(), e1 / e0));
        }
    }
    if let Some(e) = &d.energy {
        rec.summary.push(("energy".into(), e.last()));
    }
    Ok(rec)
}

fn sweep_outputs(records: &mut [RunRecord]) {
    if records.len() < 2 {
        return;
    }
    for (k, rec) in records.iter_mut().enumerate() {
        if let Some(out) = &rec.output {
            let (stem, ext) = match out.rsplit_once('.') {
                Some((a, b)) => (a.to_string(), format!(".{b}")),
                None => (out.clone(), String::new()),
            };
            rec.output = Some(format!("{stem}-{k}{ext}"));
        }
    }
}

/// Runs a scenario: one record per initial estimate of the sweep.
pub fn run_scenario(s: &Scenario) -> Result<Vec<RunRecord>> {
    s.validate()?;
    let grid = s.grid.expect("validated").grid()?;
    let src = s.regressor.as_ref().expect("validated").resolve()?;
    match (&src, s.kind) {
        (RegressorSource::Linearised { amplitude }, _) => {
            return Ok(vec![linearised_record(s, *amplitude, &grid)?])
        }
        (RegressorSource::Linear(m), ScenarioKind::PeProbe) => {
            return Ok(vec![pe_record(s, m, &grid)?])
        }
        _ => {}
    }
    let prepared = prepare(s, &src, &grid)?;
    let mut records = initial_estimates(s)
        .into_iter()
        .map(|th0| {
            let (run, label) = match &prepared {
                Prepared::Gradient(reg) => (
                    gradient_simulate(
                        reg,
                        &s.gains.as_ref().expect("validated").matrix(reg.q())?,
                        &th0,
                        &grid,
                    )?,
                    "theta",
                ),
                Prepared::Drem(ext) => (
                    drem_simulate(
                        ext,
                        &s.gains.as_ref().expect("validated").per_channel(ext.q())?,
                        &th0,
                    )?,
                    "theta",
                ),
                Prepared::Overparam(reg) => (
                    overparam_gradient(
                        reg,
                        &s.gains.as_ref().expect("validated").matrix(reg.p())?,
                        &th0,
                        &grid,
                    )?,
                    "eta",
                ),
                Prepared::Monotone(red, cert) => (
                    monotone_estimator(
                        red,
                        cert,
                        &s.gains.as_ref().expect("validated").matrix(red.q())?,
                        &th0,
                    )?,
                    "theta",
                ),
            };
            let mut rec = estimator_record(s, &run, &th0, label)?;
            if let Prepared::Monotone(red, cert) = &prepared {
                rec.summary.push(("rho1".into(), cert.rho1));
                rec.summary
                    .push(("skipped_samples".into(), red.skipped_samples().len() as f64));
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    sweep_outputs(&mut records);
    Ok(records)
}

fn linearised_record(s: &Scenario, amplitude: f64, grid: &TimeGrid) -> Result<RunRecord> {
    let (sys, x0) = fixtures::linearised_scalar(amplitude)?;
    let x = sys.simulate(&x0, grid)?;
    let reg = linearised_regression(&sys, &x)?;
    let residual = reg.residual(sys.theta_true().expect("fixture carries theta"));
    let mut columns = vec!["t".to_string()];
    let mut data = vec![grid.times().collect::<Vec<_>>()];
    columns.extend(names("x", sys.n()));
    data.extend(x.iter().map(|v| v.values().to_vec()));
    columns.extend(names("y", sys.n()));
    data.extend(reg.y.iter().map(|v| v.values().to_vec()));
    columns.push("residual".into());
    data.push(residual.values().to_vec());
    let mut rec = RunRecord::new(s.clone(), columns, data)?;
    let tail_start = grid.t0() + 2.0 / 3.0 * (grid.t_end() - grid.t0());
    let tail = grid
        .times()
        .zip(residual.values())
        .filter(|(t, _)| *t >= tail_start)
        .fold(0.0f64, |a, (_, v)| a.max(*v));
    rec.summary.push(("residual_tail_sup".into(), tail));
    Ok(rec)
}

fn pe_record(
    s: &Scenario,
    m: &[crate::signals::AnalyticSignal],
    grid: &TimeGrid,
) -> Result<RunRecord> {
    let signals: Vec<Signal> = m.iter().cloned().map(Signal::Analytic).collect();
    let metric = pe_metric(&signals, s.pe_window.expect("validated"), grid)?;
    let times = metric.grid().times().collect();
    let mut rec = RunRecord::new(
        s.clone(),
        vec!["t".into(), "pe_metric".into()],
        vec![times, metric.values().to_vec()],
    )?;
    let v = metric.values();
    rec.summary.push(("pe_initial".into(), v[0]));
    rec.summary.push(("pe_final".into(), metric.last()));
    rec.summary.push((
        "pe_min".into(),
        v.iter().copied().fold(f64::INFINITY, f64::min),
    ));
    Ok(rec)
}

/// Column prefix whose final values the step-refinement check compares.
fn key_prefix(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::OverparamNonlinear => "eta_tilde",
        ScenarioKind::LinearisedDemo => "residual",
        ScenarioKind::PeProbe => "pe_metric",
        _ => "theta_tilde",
    }
}

/// Largest change of the final key values when `dt` is halved, and the
/// allowed change (a tenth of the scenario tolerance).
pub fn refinement_gap(s: &Scenario) -> Result<(f64, f64)> {
    let tol = s
        .tolerance
        .ok_or_else(|| Error::Validation(vec!["missing `tolerance`".into()]))?;
    let coarse = run_scenario(s)?;
    let fine = run_scenario(&s.refined())?;
    let prefix = key_prefix(s.kind);
    let mut gap = 0.0f64;
    for (a, b) in coarse.iter().zip(&fine) {
        let (ka, kb) = (a.row_count() - 1, b.row_count() - 1);
        let ta = a.column("t").expect("t column")[ka];
        let tb = b.column("t").expect("t column")[kb];
        if (ta - tb).abs() > 1e-9 * (1.0 + ta.abs()) {
            return Err(Error::Dimension(format!(
                "refined run ends at {tb}, coarse at {ta}"
            )));
        }
        for (x, y) in a.prefixed(prefix, ka).iter().zip(b.prefixed(prefix, kb)) {
            gap = gap.max((x - y).abs());
        }
    }
    Ok((gap, tol / 10.0))
}

/// True when two runs of the scenario give byte-identical CSV.
pub fn is_deterministic(s: &Scenario) -> Result<bool> {
    let a = run_scenario(s)?;
    let b = run_scenario(s)?;
    Ok(a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(x, y)| to_csv_string(x) == to_csv_string(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::{builtin, SweepSpec};

    #[test]
    fn drem_record_has_eight_columns() {
        let mut s = builtin("drem-gamma3").unwrap();
        s.grid.as_mut().unwrap().t_end = 1.0;
        let recs = run_scenario(&s).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(
            recs[0].columns(),
            [
                "t",
                "theta_hat_1",
                "theta_hat_2",
                "theta_tilde_1",
                "theta_tilde_2",
                "phi",
                "energy"
            ]
            .map(String::from)
            .as_slice()
        );
    }

    #[test]
    fn zero_radius_sweep_is_single_run() {
        let mut s = builtin("drem-disk").unwrap();
        s.grid.as_mut().unwrap().t_end = 1.0;
        s.sweep = Some(SweepSpec {
            radius: 0.0,
            count: 12,
        });
        let recs = run_scenario(&s).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].config.theta_hat0, s.theta_hat0);
    }

    #[test]
    fn disk_sweep_names_outputs() {
        let mut s = builtin("drem-disk").unwrap();
        s.grid.as_mut().unwrap().t_end = 1.0;
        let recs = run_scenario(&s).unwrap();
        let count = s.sweep.unwrap().count;
        assert_eq!(recs.len(), count);
        let centre = s.theta_hat0.clone().unwrap();
        for rec in &recs {
            let th0 = rec.config.theta_hat0.as_ref().unwrap();
            let r = ((th0[0] - centre[0]).powi(2) + (th0[1] - centre[1]).powi(2)).sqrt();
            assert!((r - s.sweep.unwrap().radius).abs() < 1e-12);
        }
        assert!(recs[1].output.as_ref().unwrap().ends_with("-1.csv"));
    }

    #[test]
    fn validation_failure_surfaces() {
        let mut s = builtin("drem-gamma3").unwrap();
        s.gains = None;
        assert!(matches!(run_scenario(&s), Err(Error::Validation(_))));
    }
}
