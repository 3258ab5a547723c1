//! Small dense row-major matrices and the handful of linear-algebra kernels
//! the crate needs (products, commutators, Kronecker products, minimum-norm
//! least squares).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
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
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::Dimension(format!(
                    "ragged rows: expected {c} columns, found {}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
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

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "add")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "sub")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
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

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "mul_vec: {} columns, vector of length {}",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Non-negative integer power of a square matrix.
    pub fn pow(&self, k: u32) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension("pow of a non-square matrix".into()));
        }
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    /// Kronecker product with the row pair (i, k) mapped to composite row
    /// `i * other.rows + k`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |row, col| {
            self[(row / r2, col / c2)] * other[(row % r2, col % c2)]
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `AB - BA`.
pub fn commutator(a: &Mat, b: &Mat) -> Result<Mat> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "commutator needs equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// Outcome of [`lstsq_min_norm`].
#[derive(Clone, Debug)]
pub struct LstsqSolution {
    pub x: Vec<f64>,
    pub rank: usize,
    /// `max |A x - b|` of the returned solution.
    pub residual: f64,
}

/// Householder QR of a tall matrix (rows >= cols), stored compactly.
struct Qr {
    cols: usize,
    // reflectors in the lower part, R in the upper triangle
    a: Mat,
    betas: Vec<f64>,
}

impl Qr {
    fn new(mut a: Mat) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut betas = vec![0.0; n];
        for k in 0..n {
            let norm = math::sqrt((k..m).map(|i| a[(i, k)] * a[(i, k)]).sum());
            if norm == 0.0 {
                continue;
            }
            let alpha = if a[(k, k)] > 0.0 { -norm } else { norm };
            let v0 = a[(k, k)] - alpha;
            // v = (1, a[k+1..]/v0), beta = -v0/alpha
            for i in k + 1..m {
                a[(i, k)] /= v0;
            }
            let beta = -v0 / alpha;
            betas[k] = beta;
            a[(k, k)] = alpha;
            for j in k + 1..n {
                let mut s = a[(k, j)];
                for i in k + 1..m {
                    s += a[(i, k)] * a[(i, j)];
                }
                s *= beta;
                a[(k, j)] -= s;
                for i in k + 1..m {
                    let vik = a[(i, k)];
                    a[(i, j)] -= s * vik;
                }
            }
        }
        Self { cols: n, a, betas }
    }

    fn reflect(&self, k: usize, y: &mut [f64]) {
        let s = self.betas[k] * y.iter().enumerate().skip(k + 1).fold(y[k], |s, (i, yi)| s + self.a[(i, k)] * yi);
        y[k] -= s;
        for (i, yi) in y.iter_mut().enumerate().skip(k + 1) {
            *yi -= s * self.a[(i, k)];
        }
    }

    fn apply_qt(&self, y: &mut [f64]) {
        for k in 0..self.cols {
            self.reflect(k, y);
        }
    }

    fn apply_q(&self, y: &mut [f64]) {
        for k in (0..self.cols).rev() {
            self.reflect(k, y);
        }
    }

    fn rank(&self, rel_tol: f64) -> usize {
        let diag: Vec<f64> = (0..self.cols).map(|i| self.a[(i, i)].abs()).collect();
        let max = diag.iter().fold(0.0f64, |m, x| m.max(*x));
        diag.iter().filter(|d| **d > rel_tol * max).count()
    }
}

/// Least-squares solution of `A x = b`; when `A` has more columns than rows
/// the minimum-norm solution is returned. `rank` counts the columns of the
/// triangular factor above `rel_tol` relative to its largest pivot; callers
/// decide what to do with a rank-deficient system.
pub fn lstsq_min_norm(a: &Mat, b: &[f64], rel_tol: f64) -> Result<LstsqSolution> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::Dimension(format!(
            "lstsq: {m} rows but right-hand side of length {}",
            b.len()
        )));
    }
    let x = if m >= n {
        let qr = Qr::new(a.clone());
        let rank = qr.rank(rel_tol);
        let mut y = b.to_vec();
        qr.apply_qt(&mut y);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let rii = qr.a[(i, i)];
            if rii.abs() == 0.0 {
                continue;
            }
            let s: f64 = (i + 1..n).map(|j| qr.a[(i, j)] * x[j]).sum();
            x[i] = (y[i] - s) / rii;
        }
        (x, rank)
    } else {
        // A^T = Q R, A = R^T Q^T; x = Q R^{-T} b
        let qr = Qr::new(a.transpose());
        let rank = qr.rank(rel_tol);
        let mut z = vec![0.0; n];
        for i in 0..m {
            let rii = qr.a[(i, i)];
            let s: f64 = (0..i).map(|j| qr.a[(j, i)] * z[j]).sum();
            z[i] = if rii.abs() == 0.0 { 0.0 } else { (b[i] - s) / rii };
        }
        qr.apply_q(&mut z);
        (z, rank)
    };
    let (x, rank) = x;
    let ax = a.mul_vec(&x)?;
    let residual = ax.iter().zip(b).fold(0.0f64, |r, (p, q)| r.max((p - q).abs()));
    Ok(LstsqSolution { x, rank, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_of_identity_vanishes() {
        let b = Mat::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let c = commutator(&Mat::identity(2), &b).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        assert_eq!(commutator(&b, &b).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn commutator_rejects_mismatched_shapes() {
        let err = commutator(&Mat::identity(2), &Mat::identity(3)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn kron_layout() {
        let a = Mat::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let k = a.kron(&Mat::identity(2));
        // row (i, k) -> 2 i + k
        assert_eq!(k[(2, 0)], 3.0);
        assert_eq!(k[(3, 1)], 3.0);
        assert_eq!(k[(1, 3)], 2.0);
        assert_eq!(k[(1, 2)], 0.0);
    }

    #[test]
    fn lstsq_square_system() {
        let a = Mat::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let sol = lstsq_min_norm(&a, &[3.0, 5.0], 1e-12).unwrap();
        assert!((sol.x[0] - 0.8).abs() < 1e-14);
        assert!((sol.x[1] - 1.4).abs() < 1e-14);
        assert_eq!(sol.rank, 2);
    }

    #[test]
    fn lstsq_min_norm_wide() {
        // x + y = 2 has minimum-norm solution (1, 1)
        let a = Mat::from_rows(&[[1.0, 1.0]]).unwrap();
        let sol = lstsq_min_norm(&a, &[2.0], 1e-12).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-14 && (sol.x[1] - 1.0).abs() < 1e-14);
        assert!(sol.residual < 1e-14);
    }

    #[test]
    fn lstsq_overdetermined_fit() {
        // fit y = c0 + c1 t through (0,1), (1,3), (2,5) exactly
        let a = Mat::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
        let sol = lstsq_min_norm(&a, &[1.0, 3.0, 5.0], 1e-12).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-13 && (sol.x[1] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn lstsq_reports_rank() {
        let a = Mat::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]).unwrap();
        let sol = lstsq_min_norm(&a, &[1.0, 2.0], 1e-12).unwrap();
        assert_eq!(sol.rank, 1);
    }
}
