use super::{MonotoneCertificate, ParamMap};
use crate::error::{Error, Result};
use crate::matalg::{self, Matrix};
use crate::signals::{AnalyticSignal, Signal, SignalOperator, TimeGrid, Trajectory};

/// `y(t) = m(t) psi(theta)` with `n` outputs, `p` regressor columns and `q`
/// parameters. The `good_indices` name the `q` columns whose entries of
/// `psi` are monotone; the rest are eliminated by the reduction.
#[derive(Debug, Clone)]
pub struct FactorisableRegression {
    m: Vec<Vec<Signal>>,
    y: Vec<Signal>,
    psi: ParamMap,
    good: Vec<usize>,
    theta: Option<Vec<f64>>,
}

impl FactorisableRegression {
    /// Simulation setup: `y` is generated from `m` and `psi(theta)`.
    pub fn simulated(
        m: Vec<Vec<AnalyticSignal>>,
        psi: ParamMap,
        good_indices: &[usize],
        theta: &[f64],
    ) -> Result<Self> {
        if theta.len() != psi.q() {
            return Err(Error::Dimension(format!(
                "{} parameters for a map of {}",
                theta.len(),
                psi.q()
            )));
        }
        let eta = psi.eval(theta);
        let y = m
            .iter()
            .map(|row| {
                if row.len() != eta.len() {
                    return Err(Error::Dimension(format!(
                        "regressor row of length {}, expected {}",
                        row.len(),
                        eta.len()
                    )));
                }
                Ok(Signal::Analytic(AnalyticSignal::linear_combination(
                    row, &eta,
                )))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = m
            .into_iter()
            .map(|row| row.into_iter().map(Signal::Analytic).collect())
            .collect();
        let mut reg = Self::from_measurements(m, y, psi, good_indices)?;
        reg.theta = Some(theta.to_vec());
        Ok(reg)
    }

    pub fn from_measurements(
        m: Vec<Vec<Signal>>,
        y: Vec<Signal>,
        psi: ParamMap,
        good_indices: &[usize],
    ) -> Result<Self> {
        let (n, p, q) = (m.len(), psi.p(), psi.q());
        if n == 0 || y.len() != n || m.iter().any(|row| row.len() != p) {
            return Err(Error::Dimension(format!(
                "regressor must be {} x {p} with {} outputs",
                y.len(),
                y.len()
            )));
        }
        if !(q < p && n < p) {
            return Err(Error::Assumption(format!(
                "need q < p and n < p, got n = {n}, p = {p}, q = {q}"
            )));
        }
        if p > matalg::MAX_DIM {
            return Err(Error::TooLarge(p));
        }
        let mut sorted = good_indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if good_indices.len() != q || sorted.len() != q || sorted.last().is_some_and(|&i| i >= p) {
            return Err(Error::Dimension(format!(
                "{q} distinct good columns below {p} expected, got {good_indices:?}"
            )));
        }
        Ok(Self {
            m,
            y,
            psi,
            good: good_indices.to_vec(),
            theta: None,
        })
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn p(&self) -> usize {
        self.psi.p()
    }

    pub fn q(&self) -> usize {
        self.psi.q()
    }

    pub fn regressor(&self) -> &[Vec<Signal>] {
        &self.m
    }

    pub fn output(&self) -> &[Signal] {
        &self.y
    }

    pub fn psi(&self) -> &ParamMap {
        &self.psi
    }

    pub fn good_indices(&self) -> &[usize] {
        &self.good
    }

    pub fn bad_indices(&self) -> Vec<usize> {
        (0..self.p()).filter(|j| !self.good.contains(j)).collect()
    }

    /// `psi_g`, the restriction of `psi` to the good columns.
    pub fn psi_good(&self) -> ParamMap {
        self.psi
            .restrict(&self.good)
            .expect("validated good indices")
    }

    pub fn theta_true(&self) -> Option<&[f64]> {
        self.theta.as_deref()
    }
}

/// The regression `Y = det(Phi) psi_g(theta)` left after eliminating the
/// non-monotone columns.
#[derive(Debug, Clone)]
pub struct ReducedRegression {
    grid: TimeGrid,
    phi: Vec<Matrix>,
    y: Vec<Trajectory>,
    det_phi: Trajectory,
    skipped: Vec<usize>,
    psi_g: ParamMap,
    theta: Option<Vec<f64>>,
}

impl ReducedRegression {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn q(&self) -> usize {
        self.y.len()
    }

    pub fn phi(&self) -> &[Matrix] {
        &self.phi
    }

    pub fn mixed_output(&self) -> &[Trajectory] {
        &self.y
    }

    pub fn det_phi(&self) -> &Trajectory {
        &self.det_phi
    }

    pub fn skipped_samples(&self) -> &[usize] {
        &self.skipped
    }

    pub fn psi_good(&self) -> &ParamMap {
        &self.psi_g
    }

    pub fn theta_true(&self) -> Option<&[f64]> {
        self.theta.as_deref()
    }

    /// Per-sample `max_i |Y_i - det(Phi) psi_g,i(theta)|`.
    pub fn identity_residual(&self, theta: &[f64]) -> Trajectory {
        let target = self.psi_g.eval(theta);
        let values = (0..self.grid.len())
            .map(|k| {
                let d = self.det_phi.values()[k];
                self.y
                    .iter()
                    .zip(&target)
                    .fold(0.0f64, |acc, (y, g)| acc.max((y.values()[k] - d * g).abs()))
            })
            .collect();
        Trajectory::from_parts(self.grid, values)
    }
}

fn sample_rows(rows: &[Vec<Signal>], grid: &TimeGrid) -> Result<Vec<Vec<Trajectory>>> {
    rows.iter()
        .map(|row| row.iter().map(|s| s.sample(grid)).collect())
        .collect()
}

/// Scalar elimination for `n = 1, p = 2, q = 1` with good column 0:
/// `Y = m_2f y - m_2 y_f` and `Phi = m_2f m_1 - m_2 m_1f`.
pub fn scalar_reduce(
    reg: &FactorisableRegression,
    op: &SignalOperator,
    grid: &TimeGrid,
) -> Result<ReducedRegression> {
    if (reg.n(), reg.p(), reg.q()) != (1, 2, 1) || reg.good != [0] {
        return Err(Error::Dimension(format!(
            "scalar reduction needs (n, p, q) = (1, 2, 1) with good column 0, got ({}, {}, {}) with {:?}",
            reg.n(),
            reg.p(),
            reg.q(),
            reg.good
        )));
    }
    let row = &reg.m[0];
    let (m1, m2, y) = (
        row[0].sample(grid)?,
        row[1].sample(grid)?,
        reg.y[0].sample(grid)?,
    );
    let (m1f, m2f, yf) = (
        op.apply(&row[0], grid)?,
        op.apply(&row[1], grid)?,
        op.apply(&reg.y[0], grid)?,
    );
    let n = grid.len();
    let mut phi = Vec::with_capacity(n);
    let mut big_y = Vec::with_capacity(n);
    for k in 0..n {
        phi.push(m2f.values()[k] * m1.values()[k] - m2.values()[k] * m1f.values()[k]);
        big_y.push(m2f.values()[k] * y.values()[k] - m2.values()[k] * yf.values()[k]);
    }
    Ok(ReducedRegression {
        grid: *grid,
        phi: phi.iter().map(|&v| Matrix::diagonal(&[v])).collect(),
        y: vec![Trajectory::new(*grid, big_y)?],
        det_phi: Trajectory::new(*grid, phi)?,
        skipped: Vec::new(),
        psi_g: reg.psi_good(),
        theta: reg.theta.clone(),
    })
}

/// General elimination with `p - n` filtered rows.
///
/// Row `filtered_rows[j]` of the regression is passed through
/// `operators[j]`; by default operator `j` filters row `j mod n`. Per sample,
/// `N` is an orthonormal left annihilator of the bad columns of the extended
/// regressor, `Phi = N M_g` and `Y = adj(Phi) N [y; y_f]`. Samples where the
/// bad columns lose rank are recorded as skipped, with `det Phi = 0` and
/// `Y = 0`.
pub fn general_reduce(
    reg: &FactorisableRegression,
    operators: &[SignalOperator],
    cert: Option<&MonotoneCertificate>,
    filtered_rows: Option<&[usize]>,
    grid: &TimeGrid,
) -> Result<ReducedRegression> {
    let (n, p, q) = (reg.n(), reg.p(), reg.q());
    let cert = cert.ok_or_else(|| Error::Assumption("monotonicity certificate missing".into()))?;
    if cert.q() != q {
        return Err(Error::Dimension(format!(
            "certificate for {} parameters, regression has {q}",
            cert.q()
        )));
    }
    if operators.len() != p - n {
        return Err(Error::Dimension(format!(
            "{} operators given, p - n = {}",
            operators.len(),
            p - n
        )));
    }
    let rows: Vec<usize> = match filtered_rows {
        Some(r) if r.len() != operators.len() || r.iter().any(|&i| i >= n) => {
            return Err(Error::Dimension(format!(
                "filtered rows {r:?} do not match {} operators over {n} rows",
                operators.len()
            )))
        }
        Some(r) => r.to_vec(),
        None => (0..operators.len()).map(|j| j % n).collect(),
    };

    let mut m_ext = sample_rows(&reg.m, grid)?;
    let mut y_ext = reg
        .y
        .iter()
        .map(|s| s.sample(grid))
        .collect::<Result<Vec<_>>>()?;
    for (op, &r) in operators.iter().zip(&rows) {
        m_ext.push(
            reg.m[r]
                .iter()
                .map(|s| op.apply(s, grid))
                .collect::<Result<_>>()?,
        );
        y_ext.push(op.apply(&reg.y[r], grid)?);
    }

    let (good, bad) = (reg.good.clone(), reg.bad_indices());
    let len = grid.len();
    let mut phi_mats = Vec::with_capacity(len);
    let mut det_phi = Vec::with_capacity(len);
    let mut mixed: Vec<Vec<f64>> = vec![Vec::with_capacity(len); q];
    let mut skipped = Vec::new();
    let mut ye = vec![0.0; p];
    for k in 0..len {
        let data = m_ext
            .iter()
            .flat_map(|row| row.iter().map(move |x| x.values()[k]))
            .collect();
        let me = Matrix::from_row_major(p, p, data)?;
        let annihilator = match matalg::left_annihilator(&me.select_columns(&bad)) {
            Ok(nmat) => nmat,
            Err(Error::RankDeficient { .. }) => {
                skipped.push(k);
                phi_mats.push(Matrix::zeros(q, q));
                det_phi.push(0.0);
                mixed.iter_mut().for_each(|v| v.push(0.0));
                continue;
            }
            Err(e) => return Err(e),
        };
        for (i, y) in y_ext.iter().enumerate() {
            ye[i] = y.values()[k];
        }
        let phi = annihilator.matmul(&me.select_columns(&good));
        let y1 = annihilator.mul_vec(&ye);
        let y = matalg::adjugate(&phi)?.mul_vec(&y1);
        det_phi.push(matalg::determinant(&phi)?);
        for (i, v) in y.into_iter().enumerate() {
            mixed[i].push(v);
        }
        phi_mats.push(phi);
    }
    Ok(ReducedRegression {
        grid: *grid,
        phi: phi_mats,
        y: mixed
            .into_iter()
            .map(|v| Trajectory::new(*grid, v))
            .collect::<Result<_>>()?,
        det_phi: Trajectory::new(*grid, det_phi)?,
        skipped,
        psi_g: reg.psi_good(),
        theta: reg.theta.clone(),
    })
}
