use serde::{Deserialize, Serialize};

use super::ParamMap;
use crate::error::{Error, Result};
use crate::matalg::{self, Matrix};

/// Axis-aligned parameter box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxSpec")]
pub struct ParamBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
struct BoxSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<BoxSpec> for ParamBox {
    type Error = Error;

    fn try_from(s: BoxSpec) -> Result<Self> {
        Self::new(s.lower, s.upper)
    }
}

const PRIMES: [u64; matalg::MAX_DIM] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut scale = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * scale;
        index /= base;
        scale /= base as f64;
    }
    result
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() || lower.len() > matalg::MAX_DIM {
            return Err(Error::Dimension(format!(
                "box bounds of length {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !l.is_finite() || !u.is_finite() || l > u)
        {
            return Err(Error::Dimension(
                "box bounds must be finite with lower <= upper".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    /// `centre_i +- radius`.
    pub fn around(centre: &[f64], radius: f64) -> Result<Self> {
        Self::new(
            centre.iter().map(|c| c - radius).collect(),
            centre.iter().map(|c| c + radius).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (l, u))| l <= t && t <= u)
    }

    pub fn centre(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            self.upper[i]
                        } else {
                            self.lower[i]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Point `index` (from 1) of the Halton sequence mapped into the box.
    pub fn halton_point(&self, index: u64) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                self.lower[i] + radical_inverse(index, PRIMES[i]) * (self.upper[i] - self.lower[i])
            })
            .collect()
    }

    /// Halton points followed by the vertices and the centre.
    pub fn sample_points(&self, n_samples: usize) -> Vec<Vec<f64>> {
        let mut pts: Vec<Vec<f64>> = (1..=n_samples as u64)
            .map(|k| self.halton_point(k))
            .collect();
        pts.extend(self.vertices());
        pts.push(self.centre());
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    ScalarStrong,
    PStrong,
}

/// Sampled evidence that `psi_g` is strongly `P`-monotone on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCertificate {
    pub kind: CertificateKind,
    pub p: Matrix,
    /// smallest observed `lambda_min(P J + J^T P)`
    pub rho0: f64,
    /// secant constant in `(a - b)^T P (psi(a) - psi(b)) >= rho1 |a - b|^2`
    pub rho1: f64,
    pub domain: ParamBox,
    pub sample_count: usize,
}

impl MonotoneCertificate {
    pub fn q(&self) -> usize {
        self.domain.dim()
    }
}

/// Checks `P J(theta) + J(theta)^T P >= rho0 I` with `rho0 > 0` over
/// `n_samples` Halton points of `domain` plus its vertices and centre.
///
/// On success `rho1 = rho0 / (2 max(1, lambda_max(P)))`. A failure reports
/// the worst sampled point as [`Error::NotMonotone`].
pub fn check_monotone(
    psi_g: &ParamMap,
    p: &Matrix,
    domain: &ParamBox,
    n_samples: usize,
) -> Result<MonotoneCertificate> {
    let q = psi_g.q();
    if psi_g.p() != q || domain.dim() != q || p.rows() != q || p.cols() != q {
        return Err(Error::Dimension(format!(
            "monotonicity check needs a square map, box and P of size {q}; got map {}->{}, box {}, P {}x{}",
            psi_g.q(),
            psi_g.p(),
            domain.dim(),
            p.rows(),
            p.cols()
        )));
    }
    matalg::ensure_positive_definite(p)?;
    let points = domain.sample_points(n_samples);
    let mut worst = (f64::INFINITY, Vec::new());
    for theta in &points {
        let j = psi_g.jacobian(theta);
        let pj = p.matmul(&j);
        let margin = matalg::min_eig_sym(&pj.add(&pj.transpose()))?;
        if margin < worst.0 {
            worst = (margin, theta.clone());
        }
    }
    let (rho0, witness) = worst;
    if !(rho0 > 0.0) {
        return Err(Error::NotMonotone {
            theta: witness,
            margin: rho0,
        });
    }
    let rho1 = rho0 / (2.0 * matalg::max_eig_sym(p)?.max(1.0));
    Ok(MonotoneCertificate {
        kind: if q == 1 {
            CertificateKind::ScalarStrong
        } else {
            CertificateKind::PStrong
        },
        p: p.clone(),
        rho0,
        rho1,
        domain: domain.clone(),
        sample_count: points.len(),
    })
}
