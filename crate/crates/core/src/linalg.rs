//! Small dense linear algebra: a column-major matrix, Householder QR for
//! least squares, and Cholesky for small symmetric positive definite systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{IcpError, Result};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(IcpError::DimensionMismatch("column length"));
            }
            data.extend_from_slice(c);
        }
        Ok(Matrix { rows, cols: columns.len(), data })
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(IcpError::DimensionMismatch("row-major buffer"));
        }
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, values[i * cols + j]);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(idx.len(), self.cols);
        for j in 0..self.cols {
            let src = self.col(j);
            let dst = out.col_mut(j);
            for (d, &i) in dst.iter_mut().zip(idx) {
                *d = src[i];
            }
        }
        out
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Matrix { rows: self.rows, cols: idx.len(), data }
    }

    /// Drops one column.
    pub fn without_col(&self, drop: usize) -> Matrix {
        let keep: Vec<usize> = (0..self.cols).filter(|&j| j != drop).collect();
        self.select_cols(&keep)
    }

    /// Design matrix with a leading intercept column and the selected columns.
    pub fn design_with_intercept(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * (cols.len() + 1));
        data.extend(core::iter::repeat_n(1.0, self.rows));
        for &j in cols {
            data.extend_from_slice(self.col(j));
        }
        Matrix { rows: self.rows, cols: cols.len() + 1, data }
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * vj;
            }
        }
        out
    }

    /// `selfᵀ * v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }

    /// `selfᵀ * self`.
    pub fn gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for a in 0..self.cols {
            for b in a..self.cols {
                let v = dot(self.col(a), self.col(b));
                g.set(a, b, v);
                g.set(b, a, v);
            }
        }
        g
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(IcpError::DimensionMismatch("matrix sum"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(IcpError::DimensionMismatch("matrix product"));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let res = self.mul_vec(other.col(j));
            out.col_mut(j).copy_from_slice(&res);
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Condition number above which a design is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Least-squares solution from a Householder QR factorisation.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Inverse of `AᵀA` for the original (unscaled) columns.
    pub gram_inv: Matrix,
    /// Upper-triangular factor of the column-equilibrated design.
    r: Matrix,
    scale: Vec<f64>,
}

impl LeastSquares {
    /// Computes `vᵀ (AᵀA)⁻¹ v` through the triangular factor.
    pub fn quad_form_gram_inv(&self, v: &[f64]) -> f64 {
        // (AᵀA)⁻¹ = D⁻¹ (RᵀR)⁻¹ D⁻¹ with D the column scales.
        let scaled: Vec<f64> = v.iter().zip(&self.scale).map(|(a, s)| a / s).collect();
        let w = solve_upper_transposed(&self.r, &scaled);
        dot(&w, &w)
    }
}

/// Solves `min ‖A x − y‖` with Householder QR on the column-equilibrated
/// design. Fails when the estimated condition number exceeds
/// [`MAX_CONDITION`].
pub fn least_squares(a: &Matrix, y: &[f64]) -> Result<LeastSquares> {
    let n = a.rows();
    let m = a.cols();
    if y.len() != n {
        return Err(IcpError::DimensionMismatch("response length"));
    }
    if n < m {
        return Err(IcpError::TooFewRows { needed: m, got: n });
    }
    let mut work = a.clone();
    let mut scale = vec![1.0; m];
    for (j, s) in scale.iter_mut().enumerate() {
        let nrm = norm2(work.col(j));
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(IcpError::RankDeficient);
        }
        *s = nrm;
        for v in work.col_mut(j) {
            *v /= nrm;
        }
    }
    let mut qty = y.to_vec();
    let mut v = vec![0.0; n];
    for k in 0..m {
        // Householder vector for column k below the diagonal.
        let col = work.col(k);
        let alpha = norm2(&col[k..]);
        if alpha == 0.0 {
            return Err(IcpError::RankDeficient);
        }
        let sign = if col[k] >= 0.0 { 1.0 } else { -1.0 };
        v[k..].copy_from_slice(&col[k..]);
        v[k] += sign * alpha;
        let vnorm2 = dot(&v[k..], &v[k..]);
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..m {
            let cj = work.col_mut(j);
            let f = 2.0 * dot(&v[k..], &cj[k..]) / vnorm2;
            for (c, vi) in cj[k..].iter_mut().zip(&v[k..]) {
                *c -= f * vi;
            }
        }
        let f = 2.0 * dot(&v[k..], &qty[k..]) / vnorm2;
        for (c, vi) in qty[k..].iter_mut().zip(&v[k..]) {
            *c -= f * vi;
        }
    }
    let mut r = Matrix::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            r.set(i, j, work.get(i, j));
        }
    }
    let (dmax, dmin) = (0..m).fold((0.0f64, f64::INFINITY), |(hi, lo), i| {
        let d = libm::fabs(r.get(i, i));
        (hi.max(d), lo.min(d))
    });
    if m > 0 && (dmin == 0.0 || dmax / dmin > MAX_CONDITION) {
        return Err(IcpError::RankDeficient);
    }
    let scaled_coef = solve_upper(&r, &qty[..m]);
    let coef: Vec<f64> = scaled_coef.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let fitted = a.mul_vec(&coef);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();

    // (RᵀR)⁻¹ = R⁻¹ R⁻ᵀ, then undo the column scaling.
    let rinv = invert_upper(&r);
    let mut gram_inv = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for k in j..m {
                s += rinv.get(i, k) * rinv.get(j, k);
            }
            let v = s / (scale[i] * scale[j]);
            gram_inv.set(i, j, v);
            gram_inv.set(j, i, v);
        }
    }
    Ok(LeastSquares { coef, residuals, gram_inv, r, scale })
}

fn solve_upper(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let m = r.cols();
    let mut x = b.to_vec();
    for i in (0..m).rev() {
        let mut s = x[i];
        for k in i + 1..m {
            s -= r.get(i, k) * x[k];
        }
        x[i] = s / r.get(i, i);
    }
    x
}

/// Solves `Rᵀ x = b`.
fn solve_upper_transposed(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let m = r.cols();
    let mut x = b.to_vec();
    for i in 0..m {
        let mut s = x[i];
        for k in 0..i {
            s -= r.get(k, i) * x[k];
        }
        x[i] = s / r.get(i, i);
    }
    x
}

fn invert_upper(r: &Matrix) -> Matrix {
    let m = r.cols();
    let mut inv = Matrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for j in 0..m {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = solve_upper(r, &e);
        inv.col_mut(j).copy_from_slice(&col);
    }
    inv
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(IcpError::DimensionMismatch("cholesky needs a square matrix"));
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) {
                return Err(IcpError::RankDeficient);
            }
            let d = libm::sqrt(d);
            l.set(j, j, d);
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / d);
            }
        }
        Ok(Cholesky { l })
    }

    /// Solves `L w = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for k in 0..i {
                s -= self.l.get(i, k) * w[k];
            }
            w[i] = s / self.l.get(i, i);
        }
        w
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l.get(k, i) * x[k];
            }
            x[i] = s / self.l.get(i, i);
        }
        x
    }

    /// `bᵀ A⁻¹ b`.
    pub fn quad_form_inv(&self, b: &[f64]) -> f64 {
        let w = self.forward(b);
        dot(&w, &w)
    }
}

/// Solves a small square linear system by Gaussian elimination with partial
/// pivoting. Returns `None` for singular systems.
pub fn solve_square(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return None;
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(0.0f64, |acc, (i, j)| acc.max(libm::fabs(a.get(i, j))));
    if scale == 0.0 {
        return None;
    }
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| libm::fabs(m.get(i, k)).total_cmp(&libm::fabs(m.get(j, k)))).unwrap_or(k);
        if libm::fabs(m.get(piv, k)) <= scale * 1e-12 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                let t = m.get(k, j);
                m.set(k, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m.get(i, k) / m.get(k, k);
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m.set(i, j, m.get(i, j) - f * m.get(k, j));
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m.get(i, j) * x[j];
        }
        x[i] = s / m.get(i, i);
    }
    Some(x)
}
