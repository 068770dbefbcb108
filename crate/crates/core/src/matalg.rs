//! Small dense matrix kernels used by the mixing step.
//!
//! Everything here targets desk-scale sizes (at most [`MAX_DIM`] rows or
//! columns). None of the routines invert a matrix: the adjugate is built from
//! the Faddeev–LeVerrier recurrence, so it stays well defined when the input
//! is singular.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};
use crate::signals::Trajectory;

/// Largest dimension accepted by the square kernels.
pub const MAX_DIM: usize = 12;

/// Relative tolerance used to decide numerical rank in [`left_annihilator`].
pub const RANK_TOL: f64 = 1e-10;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn column(values: &[f64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Maximum absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn add(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(
            self.cols,
            v.len(),
            "vector length differs from column count"
        );
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Sub-matrix built from the given column indices.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out[(i, jj)] = self[(i, j)];
            }
        }
        out
    }

    fn symmetrised(&self) -> Self {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    fn check_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows > MAX_DIM {
            return Err(Error::TooLarge(self.rows));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Determinant by LU factorisation with partial pivoting.
pub fn determinant(a: &Matrix) -> Result<f64> {
    a.check_square()?;
    let n = a.rows;
    if n == 0 {
        return Ok(1.0);
    }
    let mut lu = a.data.clone();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
            .unwrap_or(k);
        let p = lu[pivot * n + k];
        if p == 0.0 {
            return Ok(0.0);
        }
        if pivot != k {
            for j in 0..n {
                lu.swap(k * n + j, pivot * n + j);
            }
            det = -det;
        }
        det *= p;
        for i in k + 1..n {
            let factor = lu[i * n + k] / p;
            if factor != 0.0 {
                for j in k + 1..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
    }
    Ok(det)
}

/// Adjugate (transposed cofactor matrix) via the Faddeev–LeVerrier recurrence.
///
/// With `M_0 = 0`, `c_n = 1` and for `k = 1..n`
/// `M_k = A M_{k-1} + c_{n-k+1} I`, `c_{n-k} = -tr(A M_k) / k`,
/// the adjugate is `(-1)^(n-1) M_n`. The recurrence only multiplies, so it is
/// valid whether or not `A` is invertible.
pub fn adjugate(a: &Matrix) -> Result<Matrix> {
    a.check_square()?;
    let n = a.rows;
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let mut m = Matrix::zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        let mut next = a.matmul(&m);
        for i in 0..n {
            next[(i, i)] += c;
        }
        m = next;
        c = -a.matmul(&m).trace() / k as f64;
    }
    Ok(if n % 2 == 1 { m } else { m.scale(-1.0) })
}

/// Orthonormal left annihilator of a tall matrix.
///
/// Returns `N` with `(r - c)` orthonormal rows spanning the orthogonal
/// complement of the column space of `B`, so `N B = 0`. Each row is signed so
/// that its first entry of non-negligible magnitude is positive. `B` must
/// have full column rank; the numerical rank is decided on the pivoted QR
/// diagonal against `RANK_TOL * ||B||_F`.
pub fn left_annihilator(b: &Matrix) -> Result<Matrix> {
    let (r, c) = (b.rows, b.cols);
    if r <= c {
        return Err(Error::Dimension(format!(
            "left annihilator needs rows > cols, got {r}x{c}"
        )));
    }
    if r > MAX_DIM {
        return Err(Error::TooLarge(r));
    }
    let norm = b.frobenius();
    let tol = RANK_TOL * norm;

    // Householder QR with column pivoting; reflectors are accumulated into Q.
    let mut work = b.clone();
    let mut q = Matrix::identity(r);
    let mut col_norms: Vec<f64> = (0..c)
        .map(|j| (0..r).map(|i| work[(i, j)].powi(2)).sum::<f64>())
        .collect();
    let mut rank = 0;
    for k in 0..c {
        let pivot = (k..c)
            .max_by(|&i, &j| col_norms[i].total_cmp(&col_norms[j]))
            .unwrap_or(k);
        if pivot != k {
            for i in 0..r {
                let tmp = work[(i, k)];
                work[(i, k)] = work[(i, pivot)];
                work[(i, pivot)] = tmp;
            }
            col_norms.swap(k, pivot);
        }
        let alpha: f64 = (k..r).map(|i| work[(i, k)].powi(2)).sum::<f64>().sqrt();
        if alpha <= tol || norm == 0.0 {
            break;
        }
        rank += 1;
        let sign = if work[(k, k)] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (k..r).map(|i| work[(i, k)]).collect();
        v[0] += sign * alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // work <- H work, q <- q H with H = I - 2 v v^T / |v|^2
        for j in 0..c {
            let dot: f64 = v
                .iter()
                .enumerate()
                .map(|(ii, vi)| vi * work[(k + ii, j)])
                .sum();
            let f = 2.0 * dot / vnorm2;
            for (ii, vi) in v.iter().enumerate() {
                work[(k + ii, j)] -= f * vi;
            }
        }
        for i in 0..r {
            let dot: f64 = v
                .iter()
                .enumerate()
                .map(|(ii, vi)| vi * q[(i, k + ii)])
                .sum();
            let f = 2.0 * dot / vnorm2;
            for (ii, vi) in v.iter().enumerate() {
                q[(i, k + ii)] -= f * vi;
            }
        }
        for (j, norm_j) in col_norms.iter_mut().enumerate().skip(k + 1) {
            *norm_j = (k + 1..r).map(|i| work[(i, j)].powi(2)).sum();
        }
    }
    if rank < c {
        return Err(Error::RankDeficient { rank });
    }

    let mut n = Matrix::zeros(r - c, r);
    for (row, j) in (c..r).enumerate() {
        for i in 0..r {
            n[(row, i)] = q[(i, j)];
        }
        let lead = n
            .row(row)
            .iter()
            .copied()
            .find(|v| v.abs() > 1e-12)
            .unwrap_or(1.0);
        if lead < 0.0 {
            for i in 0..r {
                n[(row, i)] = -n[(row, i)];
            }
        }
    }
    Ok(n)
}

/// All eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn sym_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    s.check_square()?;
    let n = s.rows;
    let scale = s.max_abs();
    let asym = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .fold(0.0_f64, |acc, (i, j)| {
            acc.max((s[(i, j)] - s[(j, i)]).abs())
        });
    if asym > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Dimension(format!(
            "matrix is not symmetric (asymmetry {asym:.3e})"
        )));
    }
    let mut a = s.symmetrised();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE).powi(2) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig_sym(s: &Matrix) -> Result<f64> {
    Ok(sym_eigenvalues(s)?.first().copied().unwrap_or(f64::NAN))
}

pub fn max_eig_sym(s: &Matrix) -> Result<f64> {
    Ok(sym_eigenvalues(s)?.last().copied().unwrap_or(f64::NAN))
}

/// Fails unless `s` is symmetric with a strictly positive spectrum.
pub fn ensure_positive_definite(s: &Matrix) -> Result<()> {
    match min_eig_sym(s) {
        Ok(l) if l > 0.0 => Ok(()),
        Ok(_) => Err(Error::NotPositiveDefinite),
        Err(Error::Dimension(_)) => Err(Error::NotPositiveDefinite),
        Err(e) => Err(e),
    }
}

/// Trapezoidal integral of `x^2` over `[t_a, t_b]`.
///
/// Interval ends that fall between samples are handled by linear
/// interpolation of `x`.
pub fn l2_energy(x: &Trajectory, t_a: f64, t_b: f64) -> Result<f64> {
    let grid = x.grid();
    let (start, end) = (grid.t0(), grid.t_end());
    let slack = 1e-9 * grid.dt();
    if t_a > t_b || t_a < start - slack || t_b > end + slack {
        return Err(Error::Interval {
            from: t_a,
            to: t_b,
            start,
            end,
        });
    }
    let t_a = t_a.max(start);
    let t_b = t_b.min(end);
    let values = x.values();
    let dt = grid.dt();
    let ua = (t_a - start) / dt;
    let ub = (t_b - start) / dt;
    let ka = snap_ceil(ua);
    let kb = snap_floor(ub);
    if ka > kb {
        // both ends inside one cell
        let (xa, xb) = (x.value_at_linear(t_a), x.value_at_linear(t_b));
        return Ok(0.5 * (xa * xa + xb * xb) * (t_b - t_a));
    }
    let mut energy = 0.0;
    for k in ka..kb {
        energy += 0.5 * (values[k].powi(2) + values[k + 1].powi(2)) * dt;
    }
    let head = grid.time(ka) - t_a;
    if head > 0.0 {
        let xa = x.value_at_linear(t_a);
        energy += 0.5 * (xa * xa + values[ka].powi(2)) * head;
    }
    let tail = t_b - grid.time(kb);
    if tail > 0.0 {
        let xb = x.value_at_linear(t_b);
        energy += 0.5 * (xb * xb + values[kb].powi(2)) * tail;
    }
    Ok(energy)
}

/// Running energy `E_k = integral of x^2 over [t0, t_k]` (trapezoidal).
pub fn cumulative_energy(x: &Trajectory) -> Trajectory {
    let dt = x.grid().dt();
    let v = x.values();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in v.windows(2) {
        acc += 0.5 * (w[0] * w[0] + w[1] * w[1]) * dt;
        out.push(acc);
    }
    Trajectory::from_parts(*x.grid(), out)
}

fn snap_ceil(u: f64) -> usize {
    let r = u.round();
    if (u - r).abs() < 1e-9 {
        r as usize
    } else {
        u.ceil() as usize
    }
}

fn snap_floor(u: f64) -> usize {
    let r = u.round();
    if (u - r).abs() < 1e-9 {
        r as usize
    } else {
        u.floor() as usize
    }
}
