use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{commutator, Mat};
use crate::model::{GtlState, State};
use crate::poisson::BracketTable;

use super::gtl_entry_coordinates;

/// Integer tensor `sum_i E_ii (x) E_ii + 2 sum_{i<j} E_ij (x) E_ji` stored as an
/// `N^2 x N^2` matrix; the pair (i, k) maps to composite index `i N + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RMatrix {
    pub n: usize,
    entries: Vec<i64>,
}

impl RMatrix {
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    /// Entry at composite row/column.
    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.dim() + col]
    }

    /// Coefficient of `E_ij (x) E_kl`.
    pub fn coefficient(&self, i: usize, j: usize, k: usize, l: usize) -> i64 {
        self.get(i * self.n + k, j * self.n + l)
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|x| **x != 0).count()
    }

    pub fn to_mat(&self) -> Mat {
        let d = self.dim();
        Mat::from_fn(d, d, |r, c| self.get(r, c) as f64)
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        let mut entries = vec![0; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.get(r, c);
            }
        }
        Self { n: self.n, entries }
    }
}

pub fn r_matrix(n: usize) -> Result<RMatrix> {
    if n < 2 {
        return Err(Error::Precondition(format!("r-matrix needs N >= 2, got {n}")));
    }
    let d = n * n;
    let mut entries = vec![0i64; d * d];
    let mut add = |i: usize, j: usize, k: usize, l: usize, c: i64| {
        entries[(i * n + k) * d + (j * n + l)] += c;
    };
    for i in 0..n {
        add(i, i, i, i, 1);
        for j in i + 1..n {
            add(i, j, j, i, 2);
        }
    }
    Ok(RMatrix { n, entries })
}

/// Which commutator right-hand side to compare the bracket tensor against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RForm {
    /// `[r, L (x) I] - [r^T, I (x) L]`.
    #[default]
    Transposed,
    /// `[r, L (x) I + I (x) L]`.
    Symmetric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RMatrixResidual {
    /// `max |{L (x), L} - rhs|`.
    pub residual: f64,
    pub bracket_max: f64,
    pub rhs_max: f64,
}

/// Tensor of coordinate brackets `{L_ij, L_kl}` at row `(i, k)`, column
/// `(j, l)`.
pub fn bracket_tensor(state: &GtlState, table: &BracketTable) -> Result<Mat> {
    state.validate()?;
    let x = State::Gtl(state.clone()).to_vec();
    if table.dim() != x.len() {
        return Err(Error::Dimension(format!(
            "bracket table has {} coordinates, state has {}",
            table.dim(),
            x.len()
        )));
    }
    let n = state.dim();
    let coords = gtl_entry_coordinates(state.n);
    Ok(Mat::from_fn(n * n, n * n, |row, col| {
        let (i, k) = (row / n, row % n);
        let (j, l) = (col / n, col % n);
        match (coords[i][j], coords[k][l]) {
            (Some(a), Some(b)) => table.eval(a, b, &x),
            _ => 0.0,
        }
    }))
}

/// Compares the coordinate-bracket tensor of the banded Lax matrix with the
/// r-matrix commutator form. The value is a measurement: nothing here
/// presumes the identity holds.
pub fn r_matrix_residual(state: &GtlState, table: &BracketTable, form: RForm) -> Result<RMatrixResidual> {
    let lhs = bracket_tensor(state, table)?;
    let n = state.dim();
    let (l, _) = super::gtl_pair(state)?;
    let id = Mat::identity(n);
    let l1 = l.kron(&id);
    let l2 = id.kron(&l);
    let r = r_matrix(n)?;
    let rm = r.to_mat();
    let rhs = match form {
        RForm::Transposed => commutator(&rm, &l1)?.sub(&commutator(&r.transpose().to_mat(), &l2)?)?,
        RForm::Symmetric => commutator(&rm, &l1.add(&l2)?)?,
    };
    Ok(RMatrixResidual {
        residual: lhs.sub(&rhs)?.max_abs(),
        bracket_max: lhs.max_abs(),
        rhs_max: rhs.max_abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_coefficients() {
        let r = r_matrix(2).unwrap();
        assert_eq!(r.coefficient(0, 0, 0, 0), 1);
        assert_eq!(r.coefficient(1, 1, 1, 1), 1);
        assert_eq!(r.coefficient(0, 1, 1, 0), 2);
        assert_eq!(r.nonzero_count(), 3);
        assert_eq!(r.coefficient(1, 0, 0, 1), 0);
    }

    #[test]
    fn three_site_count() {
        assert_eq!(r_matrix(3).unwrap().nonzero_count(), 6);
    }

    #[test]
    fn integer_valued_and_sized() {
        for n in 2..6 {
            let r = r_matrix(n).unwrap();
            assert_eq!(r.nonzero_count(), n + n * (n - 1) / 2);
            let m = r.to_mat();
            assert!(m.as_slice().iter().all(|x| x.fract() == 0.0));
        }
        assert!(r_matrix(1).is_err());
    }
}
