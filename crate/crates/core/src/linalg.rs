//! Dense linear algebra over `f64`: Householder QR with column pivoting,
//! least squares, numerical rank and orthonormal null-space bases.

use crate::error::{Error, Result};

/// Default relative pivot threshold for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Row-major dense matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: c.len() });
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        if m.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
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

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec: length mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `selfᵗ * y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "tr_mul_vec: length mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    /// Submatrix on the given row and column index lists (in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (oi, &i) in rows.iter().enumerate() {
            for (oj, &j) in cols.iter().enumerate() {
                out[(oi, oj)] = self[(i, j)];
            }
        }
        out
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let all: Vec<usize> = (0..self.rows).collect();
        self.select(&all, cols)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder QR with column pivoting, `A P = Q R`.
///
/// Reflectors are stored below the diagonal of `qr` (LAPACK style, with an
/// implicit unit leading entry), `R` on and above it.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    qr: DenseMatrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn factor(a: &DenseMatrix) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut qr = a.clone();
        let steps = m.min(n);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..steps {
            // Exact trailing column norms; the matrices here are small enough
            // that downdating is not worth its cancellation issues.
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..n {
                let s: f64 = (k..m).map(|i| qr[(i, j)] * qr[(i, j)]).sum();
                if s > best_norm {
                    best_norm = s;
                    best = j;
                }
            }
            if best != k {
                for i in 0..m {
                    let (x, y) = (qr[(i, k)], qr[(i, best)]);
                    qr[(i, k)] = y;
                    qr[(i, best)] = x;
                }
                perm.swap(k, best);
            }

            let alpha = qr[(k, k)];
            let tail: f64 = (k + 1..m).map(|i| qr[(i, k)] * qr[(i, k)]).sum();
            if tail == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let norm = (alpha * alpha + tail).sqrt();
            let beta = if alpha >= 0.0 { -norm } else { norm };
            let scale = 1.0 / (alpha - beta);
            for i in k + 1..m {
                qr[(i, k)] *= scale;
            }
            tau[k] = (beta - alpha) / beta;
            qr[(k, k)] = beta;

            for j in k + 1..n {
                let mut s = qr[(k, j)];
                for i in k + 1..m {
                    s += qr[(i, k)] * qr[(i, j)];
                }
                s *= tau[k];
                qr[(k, j)] -= s;
                for i in k + 1..m {
                    let v = qr[(i, k)];
                    qr[(i, j)] -= s * v;
                }
            }
        }
        Self { qr, tau, perm }
    }

    /// Diagonal of `R`, in pivot order.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.tau.len()).map(|k| self.qr[(k, k)]).collect()
    }

    /// Column permutation: position `k` of `A P` holds column `perm()[k]` of `A`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Number of pivots with `|R_kk| > tol * |R_00|`.
    pub fn rank(&self, tol: f64) -> usize {
        let diag = self.diagonal();
        let Some(first) = diag.first() else {
            return 0;
        };
        let largest = first.abs();
        if largest == 0.0 {
            return 0;
        }
        diag.iter().take_while(|r| r.abs() > tol * largest).count()
    }

    /// Applies the `k`-th reflector `I − t v vᵗ` to `y`.
    fn reflect(&self, k: usize, t: f64, y: &mut [f64]) {
        let mut s = y[k];
        for (i, v) in y.iter().enumerate().skip(k + 1) {
            s += self.qr[(i, k)] * v;
        }
        s *= t;
        y[k] -= s;
        for (i, v) in y.iter_mut().enumerate().skip(k + 1) {
            *v -= s * self.qr[(i, k)];
        }
    }

    /// Overwrites `y` with `Qᵗ y`.
    fn apply_qt(&self, y: &mut [f64]) {
        for (k, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            self.reflect(k, t, y);
        }
    }

    /// Overwrites `y` with `Q y`.
    fn apply_q(&self, y: &mut [f64]) {
        for (k, &t) in self.tau.iter().enumerate().rev() {
            if t == 0.0 {
                continue;
            }
            self.reflect(k, t, y);
        }
    }
}

/// Minimizes `‖a z − y‖₂` for a full-column-rank `a` via pivoted QR.
pub fn least_squares(a: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != a.rows {
        return Err(Error::DimensionMismatch { expected: a.rows, found: y.len() });
    }
    let n = a.cols;
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.rows == 0 {
        return Err(Error::RankDeficient { rank: 0, cols: n });
    }
    let qr = PivotedQr::factor(a);
    let rank = if a.rows < n { qr.rank(DEFAULT_RANK_TOL).min(a.rows) } else { qr.rank(DEFAULT_RANK_TOL) };
    if rank < n {
        return Err(Error::RankDeficient { rank, cols: n });
    }
    let mut rhs = y.to_vec();
    qr.apply_qt(&mut rhs);
    let mut z = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for (j, v) in z.iter().enumerate().skip(k + 1) {
            s -= qr.qr[(k, j)] * v;
        }
        z[k] = s / qr.qr[(k, k)];
    }
    let mut out = vec![0.0; n];
    for (k, &p) in qr.perm.iter().enumerate() {
        out[p] = z[k];
    }
    Ok(out)
}

/// Numerical column rank with a relative pivot threshold.
pub fn column_rank(a: &DenseMatrix, tol: f64) -> usize {
    if a.rows == 0 || a.cols == 0 {
        return 0;
    }
    PivotedQr::factor(a).rank(tol)
}

/// Orthonormal basis (as columns) of the numerical null space of `a`.
///
/// Computed from the pivoted QR of `aᵗ`: the trailing `n − rank` columns of
/// the full orthogonal factor span the orthogonal complement of the row space.
pub fn nullspace_basis(a: &DenseMatrix, tol: f64) -> DenseMatrix {
    let n = a.cols;
    if n == 0 {
        return DenseMatrix::zeros(0, 0);
    }
    if a.rows == 0 {
        return DenseMatrix::identity(n);
    }
    let qr = PivotedQr::factor(&a.transpose());
    let rank = qr.rank(tol);
    let mut basis = DenseMatrix::zeros(n, n - rank);
    for (c, j) in (rank..n).enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        qr.apply_q(&mut e);
        for (i, v) in e.into_iter().enumerate() {
            basis[(i, c)] = v;
        }
    }
    basis
}
