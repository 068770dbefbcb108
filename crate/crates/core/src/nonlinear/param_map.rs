use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matalg::Matrix;

type EvalFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JacFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// A parameter map `psi: R^q -> R^p` with its Jacobian
/// `J_ij = d psi_i / d theta_j` (a `p x q` matrix).
///
/// Maps without an analytic Jacobian fall back to central differences with
/// step `1e-6 (1 + |theta_j|)`.
#[derive(Clone)]
pub struct ParamMap {
    name: String,
    q: usize,
    p: usize,
    eval: EvalFn,
    jac: Option<JacFn>,
}

impl fmt::Debug for ParamMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamMap")
            .field("name", &self.name)
            .field("q", &self.q)
            .field("p", &self.p)
            .field("analytic_jacobian", &self.jac.is_some())
            .finish()
    }
}

impl ParamMap {
    pub fn new<F>(name: impl Into<String>, q: usize, p: usize, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if q == 0 || p == 0 {
            return Err(Error::Dimension(format!("parameter map {q} -> {p}")));
        }
        Ok(Self {
            name: name.into(),
            q,
            p,
            eval: Arc::new(eval),
            jac: None,
        })
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    /// `psi(theta)`. Panics if `theta.len() != q`.
    pub fn eval(&self, theta: &[f64]) -> Vec<f64> {
        assert_eq!(theta.len(), self.q, "{}: parameter length", self.name);
        let out = (self.eval)(theta);
        assert_eq!(out.len(), self.p, "{}: output length", self.name);
        out
    }

    pub fn jacobian(&self, theta: &[f64]) -> Matrix {
        match &self.jac {
            Some(j) => {
                assert_eq!(theta.len(), self.q, "{}: parameter length", self.name);
                j(theta)
            }
            None => self.finite_difference_jacobian(theta),
        }
    }

    pub fn finite_difference_jacobian(&self, theta: &[f64]) -> Matrix {
        let mut jac = Matrix::zeros(self.p, self.q);
        let mut probe = theta.to_vec();
        for j in 0..self.q {
            let h = 1e-6 * (1.0 + theta[j].abs());
            probe[j] = theta[j] + h;
            let plus = self.eval(&probe);
            probe[j] = theta[j] - h;
            let minus = self.eval(&probe);
            probe[j] = theta[j];
            for i in 0..self.p {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        jac
    }

    /// The sub-map formed by the output components `rows` (e.g. `psi_g`).
    pub fn restrict(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() || rows.iter().any(|&r| r >= self.p) {
            return Err(Error::Dimension(format!(
                "rows {rows:?} out of range for p = {}",
                self.p
            )));
        }
        let idx: Arc<[usize]> = rows.into();
        let eval = self.eval.clone();
        let pick = idx.clone();
        let mut out = Self {
            name: format!("{}{rows:?}", self.name),
            q: self.q,
            p: rows.len(),
            eval: Arc::new(move |th| {
                let full = eval(th);
                pick.iter().map(|&r| full[r]).collect()
            }),
            jac: None,
        };
        if let Some(jac) = &self.jac {
            let jac = jac.clone();
            out.jac = Some(Arc::new(move |th| {
                let full = jac(th);
                let data = idx.iter().flat_map(|&r| full.row(r).to_vec()).collect();
                Matrix::from_row_major(idx.len(), full.cols(), data).expect("restricted jacobian")
            }));
        }
        Ok(out)
    }

    pub fn identity(q: usize) -> Result<Self> {
        Self::linear(Matrix::identity(q))
    }

    /// `psi(theta) = A theta`.
    pub fn linear(a: Matrix) -> Result<Self> {
        let a2 = a.clone();
        Ok(
            Self::new("linear", a.cols(), a.rows(), move |th| a.mul_vec(th))?
                .with_jacobian(move |_| a2.clone()),
        )
    }

    /// `psi(theta) = [theta - e^{-theta}, cos theta]`: the first entry is
    /// strongly monotone, the second is not.
    pub fn scalar_example() -> Self {
        Self::new("scalar-example", 1, 2, |th| {
            vec![th[0] - (-th[0]).exp(), th[0].cos()]
        })
        .expect("static dimensions")
        .with_jacobian(|th| Matrix::column(&[1.0 + (-th[0]).exp(), -th[0].sin()]))
    }

    /// `psi(theta) = [sin(theta_1 theta_2), theta_1 - e^{-theta_1} + theta_2,
    /// theta_2^3 / 3 + theta_2 + theta_1]` with the last two entries jointly
    /// monotone.
    pub fn vector_example() -> Self {
        Self::new("vector-example", 2, 3, |th| {
            let (a, b) = (th[0], th[1]);
            vec![(a * b).sin(), a - (-a).exp() + b, b.powi(3) / 3.0 + b + a]
        })
        .expect("static dimensions")
        .with_jacobian(|th| {
            let (a, b) = (th[0], th[1]);
            let c = (a * b).cos();
            Matrix::from_rows(&[[b * c, a * c], [1.0 + (-a).exp(), 1.0], [1.0, b * b + 1.0]])
                .expect("finite entries")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_jacobian(map: &ParamMap, theta: &[f64]) -> f64 {
        let a = map.jacobian(theta);
        let fd = map.finite_difference_jacobian(theta);
        let mut worst = 0.0f64;
        for i in 0..map.p() {
            for j in 0..map.q() {
                let rel = (a[(i, j)] - fd[(i, j)]).abs() / (1.0 + a[(i, j)].abs());
                worst = worst.max(rel);
            }
        }
        worst
    }

    proptest! {
        #[test]
        fn builtin_jacobians_match_differences(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            prop_assert!(check_jacobian(&ParamMap::scalar_example(), &[a]) < 1e-5);
            prop_assert!(check_jacobian(&ParamMap::vector_example(), &[a, b]) < 1e-5);
            let g = ParamMap::vector_example().restrict(&[1, 2]).unwrap();
            prop_assert!(check_jacobian(&g, &[a, b]) < 1e-5);
        }
    }

    #[test]
    fn scalar_example_at_one() {
        let v = ParamMap::scalar_example().eval(&[1.0]);
        assert!((v[0] - 0.632).abs() < 1e-3);
        assert!((v[1] - 0.540).abs() < 1e-3);
    }

    #[test]
    fn restrict_picks_rows() {
        let g = ParamMap::vector_example().restrict(&[2]).unwrap();
        assert_eq!((g.q(), g.p()), (2, 1));
        assert_eq!(g.eval(&[1.0, 3.0]), vec![9.0 + 3.0 + 1.0]);
        assert!(ParamMap::vector_example().restrict(&[3]).is_err());
    }

    #[test]
    fn fallback_jacobian_without_analytic_form() {
        let m = ParamMap::new("square", 1, 1, |th| vec![th[0] * th[0]]).unwrap();
        assert!(!m.has_analytic_jacobian());
        assert!((m.jacobian(&[1.5])[(0, 0)] - 3.0).abs() < 1e-8);
    }
}
