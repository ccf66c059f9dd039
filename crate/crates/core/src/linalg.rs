//! Small dense matrix kernel.
//!
//! Everything here works on row-major `f64` storage sized for information
//! matrices of at most a dozen columns. Symmetric positive definite inputs go
//! through Cholesky; rank uses Gaussian elimination with full pivoting.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot threshold used by [`rank`] throughout the crate.
pub const RANK_TOL: f64 = 1e-9;

/// A Cholesky pivot at or below this fraction of the largest diagonal entry
/// marks the matrix as singular.
pub const CHOLESKY_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

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

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
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

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
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

/// `X'X`.
pub fn gram(x: &Matrix) -> Matrix {
    let p = x.cols;
    let mut g = Matrix::zeros(p, p);
    for r in 0..x.rows {
        add_outer(&mut g.data, x.row(r), 1.0);
    }
    g
}

/// `m += w * v v'` for a row-major `len(v) x len(v)` buffer. Only touches the
/// upper triangle and mirrors it, so the result is exactly symmetric.
pub(crate) fn add_outer(m: &mut [f64], v: &[f64], w: f64) {
    let p = v.len();
    for i in 0..p {
        let vi = w * v[i];
        if vi == 0.0 {
            continue;
        }
        for j in i..p {
            m[i * p + j] += vi * v[j];
        }
    }
    for i in 0..p {
        for j in 0..i {
            m[i * p + j] = m[j * p + i];
        }
    }
}

/// Outcome of [`logdet_spd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub is_singular: bool,
    /// `ln|M|`; `-inf` when singular.
    pub logdet: f64,
}

/// In-place lower Cholesky factor of a row-major `p x p` buffer. Returns
/// `false` when a pivot falls to `CHOLESKY_TOL` times the largest diagonal.
pub(crate) fn cholesky_in_place(a: &mut [f64], p: usize) -> bool {
    let max_diag = (0..p).fold(0.0_f64, |m, i| m.max(a[i * p + i]));
    if max_diag <= 0.0 {
        return false;
    }
    let floor = CHOLESKY_TOL * max_diag;
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if d <= floor {
            return false;
        }
        let d = d.sqrt();
        a[j * p + j] = d;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / d;
        }
    }
    true
}

/// Log-determinant of the factor produced by [`cholesky_in_place`].
pub(crate) fn cholesky_logdet(l: &[f64], p: usize) -> f64 {
    2.0 * (0..p).map(|i| l[i * p + i].ln()).sum::<f64>()
}

/// Diagonal of `M^{-1}` from its Cholesky factor, written into `out`.
/// `work` must hold at least `p` values.
pub(crate) fn cholesky_inverse_diag(l: &[f64], p: usize, out: &mut [f64], work: &mut [f64]) {
    // (M^{-1})_jj = || L^{-1} e_j ||^2; solve L z = e_j by forward substitution.
    for j in 0..p {
        let z = &mut work[..p];
        z.iter_mut().for_each(|v| *v = 0.0);
        z[j] = 1.0 / l[j * p + j];
        for i in (j + 1)..p {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i * p + k] * z[k];
            }
            z[i] = s / l[i * p + i];
        }
        out[j] = z[j..].iter().map(|v| v * v).sum();
    }
}

/// `ln|M|` for a symmetric positive (semi)definite matrix.
///
/// Panics when `m` is not square.
pub fn logdet_spd(m: &Matrix) -> LogDet {
    assert!(m.is_square(), "logdet_spd needs a square matrix");
    let p = m.rows;
    let mut a = m.data.clone();
    if cholesky_in_place(&mut a, p) {
        LogDet {
            is_singular: false,
            logdet: cholesky_logdet(&a, p),
        }
    } else {
        LogDet {
            is_singular: true,
            logdet: f64::NEG_INFINITY,
        }
    }
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn inverse_spd(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension("inverse of a non-square matrix".into()));
    }
    let p = m.rows;
    let mut l = m.data.clone();
    if !cholesky_in_place(&mut l, p) {
        return Err(Error::Singular);
    }
    let mut inv = Matrix::zeros(p, p);
    let mut z = vec![0.0; p];
    let mut x = vec![0.0; p];
    for j in 0..p {
        // L z = e_j
        for i in 0..p {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i * p + k] * z[k];
            }
            z[i] = s / l[i * p + i];
        }
        // L' x = z
        for i in (0..p).rev() {
            let mut s = z[i];
            for k in (i + 1)..p {
                s -= l[k * p + i] * x[k];
            }
            x[i] = s / l[i * p + i];
        }
        for i in 0..p {
            inv[(i, j)] = x[i];
        }
    }
    Ok(inv)
}

/// Numerical rank by Gaussian elimination with full pivoting. A pivot counts
/// when it is at least `tol` times the first (largest) pivot.
pub fn rank(m: &Matrix, tol: f64) -> usize {
    assert!(tol > 0.0, "rank tolerance must be positive");
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut r = 0;
    let mut first_pivot = 0.0;
    while r < rows.min(cols) {
        let (mut pi, mut pj, mut best) = (r, r, 0.0);
        for i in r..rows {
            for j in r..cols {
                let v = a[i * cols + j].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if r == 0 {
            first_pivot = best;
        }
        if best == 0.0 || best < tol * first_pivot {
            break;
        }
        if pi != r {
            for j in 0..cols {
                a.swap(pi * cols + j, r * cols + j);
            }
        }
        if pj != r {
            for i in 0..rows {
                a.swap(i * cols + pj, i * cols + r);
            }
        }
        let piv = a[r * cols + r];
        for i in (r + 1)..rows {
            let f = a[i * cols + r] / piv;
            if f == 0.0 {
                continue;
            }
            for j in r..cols {
                a[i * cols + j] -= f * a[r * cols + j];
            }
        }
        r += 1;
    }
    r
}
