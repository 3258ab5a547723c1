//! Lax representations: matrix builders for every state kind, the discrete
//! 2x2 zero-curvature residual, spectra, and the classical r-matrix check.

mod rmatrix;
mod spectrum;

pub use rmatrix::{r_matrix, r_matrix_residual, RForm, RMatrix, RMatrixResidual};
pub use spectrum::{spectrum, Spectrum, SpectrumMethod};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
pub use crate::matrix::commutator;
use crate::matrix::Mat;
use crate::model::{Boundary, CdwState, GtlState, N3PqState, N3QState, N3State, RepParams, TodaState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaxRep {
    /// Per-site 2x2 pair of the classic chain.
    Tl2x2,
    /// Banded `(2N+1)`-square pair of the generalized lattice.
    GtlBanded,
    /// Symmetric three-site pair.
    N3Sym,
    /// Three-site matrix in position/auxiliary coordinates.
    N3Q,
    /// Three-site matrix in canonical `(P, Q)` coordinates.
    N3Pq,
    /// Three-site pair in squared variables.
    Cdw,
}

impl LaxRep {
    pub fn name(self) -> &'static str {
        match self {
            LaxRep::Tl2x2 => "tl-2x2",
            LaxRep::GtlBanded => "gtl-banded",
            LaxRep::N3Sym => "n3-sym",
            LaxRep::N3Q => "n3-q",
            LaxRep::N3Pq => "n3-pq",
            LaxRep::Cdw => "cdw",
        }
    }
}

/// Which 2x2 pair of the classic chain to use.
///
/// `Printed` is the reference form `L_n = [[p_n + l, e^{q_n}], [-e^{-q_n}, 0]]`,
/// `M_n = [[0, -e^{q_n}], [e^{-q_n}, l]]`; its zero-curvature condition does
/// not reproduce the chain away from `q = 0`. `Consistent` uses
/// `L_n = [[l - p_n, e^{-q_n}], [-e^{q_n}, 0]]`,
/// `M_n = [[0, -e^{-q_n}], [e^{q_{n-1}}, l]]`, which agrees with the printed
/// matrices at `q = p = 0` and whose compatibility condition is exactly
/// `q'' = e^{q_{n-1}-q_n} - e^{q_n-q_{n+1}}` for every `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TlConvention {
    #[default]
    Printed,
    Consistent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaxPair {
    pub l: Mat,
    pub m: Mat,
    pub rep: LaxRep,
    pub lambda: Option<f64>,
}

/// Borrowed input for [`build_lax`]; the classic chain also needs the site.
#[derive(Clone, Copy, Debug)]
pub enum LaxInput<'a> {
    Toda {
        state: &'a TodaState,
        site: usize,
        convention: TlConvention,
    },
    Gtl(&'a GtlState),
    N3(&'a N3State),
    N3Q(&'a N3QState),
    N3Pq(&'a N3PqState),
    Cdw(&'a CdwState),
}

impl LaxInput<'_> {
    fn name(&self) -> &'static str {
        match self {
            LaxInput::Toda { .. } => "toda",
            LaxInput::Gtl(_) => "gtl",
            LaxInput::N3(_) => "n3",
            LaxInput::N3Q(_) => "n3q",
            LaxInput::N3Pq(_) => "n3pq",
            LaxInput::Cdw(_) => "cdw",
        }
    }
}

/// Builds the Lax pair of `rep` for `input`.
pub fn build_lax(input: LaxInput<'_>, rep: LaxRep, params: &RepParams) -> Result<LaxPair> {
    let mismatch = |expected: &'static str| Error::KindMismatch {
        expected,
        found: input.name(),
    };
    let (l, m) = match rep {
        LaxRep::Tl2x2 => match input {
            LaxInput::Toda {
                state,
                site,
                convention,
            } => {
                let lambda = params.lambda.unwrap_or(0.0);
                (tl_l(state, site, lambda, convention)?, tl_m(state, site, lambda, convention)?)
            }
            _ => return Err(mismatch("toda")),
        },
        LaxRep::GtlBanded => match input {
            LaxInput::Gtl(s) => gtl_pair(s)?,
            _ => return Err(mismatch("gtl")),
        },
        LaxRep::N3Sym => match input {
            LaxInput::N3(s) => n3_pair(s),
            _ => return Err(mismatch("n3")),
        },
        LaxRep::N3Q => match input {
            LaxInput::N3Q(s) => {
                check_scales(params)?;
                let l = n3q_matrix(s, params);
                let m = split_antisymmetric(&l);
                (l, m)
            }
            _ => return Err(mismatch("n3q")),
        },
        LaxRep::N3Pq => match input {
            LaxInput::N3Pq(s) => {
                check_scales(params)?;
                let l = n3pq_matrix(s, params);
                let m = split_antisymmetric(&l);
                (l, m)
            }
            _ => return Err(mismatch("n3pq")),
        },
        LaxRep::Cdw => match input {
            LaxInput::Cdw(s) => cdw_pair(s),
            _ => return Err(mismatch("cdw")),
        },
    };
    Ok(LaxPair {
        l,
        m,
        rep,
        lambda: if rep == LaxRep::Tl2x2 { params.lambda } else { None },
    })
}

fn check_scales(params: &RepParams) -> Result<()> {
    if params.d1 == 0.0 || params.d2 == 0.0 {
        return Err(Error::Precondition(format!(
            "scale constants must be nonzero (d1 = {}, d2 = {})",
            params.d1, params.d2
        )));
    }
    Ok(())
}

/// `M = L_upper - L_lower` (zero diagonal).
fn split_antisymmetric(l: &Mat) -> Mat {
    Mat::from_fn(l.rows(), l.cols(), |i, j| match i.cmp(&j) {
        core::cmp::Ordering::Less => l[(i, j)],
        core::cmp::Ordering::Greater => -l[(i, j)],
        core::cmp::Ordering::Equal => 0.0,
    })
}

fn tl_site(state: &TodaState, site: usize) -> Result<()> {
    state.validate()?;
    if site >= state.sites() {
        return Err(Error::Dimension(format!(
            "site {site} out of range for {} sites",
            state.sites()
        )));
    }
    Ok(())
}

fn tl_l(state: &TodaState, site: usize, lambda: f64, convention: TlConvention) -> Result<Mat> {
    tl_site(state, site)?;
    let (q, p) = (state.q[site], state.p[site]);
    Ok(match convention {
        TlConvention::Printed => Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => p + lambda,
            (0, 1) => math::exp(q),
            (1, 0) => -math::exp(-q),
            _ => 0.0,
        }),
        TlConvention::Consistent => Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => lambda - p,
            (0, 1) => math::exp(-q),
            (1, 0) => -math::exp(q),
            _ => 0.0,
        }),
    })
}

/// `M_site`; `site == N` addresses the matrix beyond the last particle
/// (needed by the zero-curvature condition at the last site).
fn tl_m(state: &TodaState, site: usize, lambda: f64, convention: TlConvention) -> Result<Mat> {
    state.validate()?;
    let n = state.sites();
    if site > n {
        return Err(Error::Dimension(format!("site {site} out of range for {n} sites")));
    }
    let periodic = state.boundary == Boundary::Periodic;
    // exp(s * q_j) with open ends pinned at q_0 = -inf, q_{N+1} = +inf
    let q_at = |j: isize| -> Option<f64> {
        if (0..n as isize).contains(&j) {
            Some(state.q[j as usize])
        } else if periodic {
            Some(state.q[j.rem_euclid(n as isize) as usize])
        } else {
            None
        }
    };
    let j = site as isize;
    Ok(match convention {
        TlConvention::Printed => {
            let q = q_at(j).ok_or_else(|| {
                Error::Precondition("the reference pair has no matrix beyond an open end".into())
            })?;
            Mat::from_fn(2, 2, |r, c| match (r, c) {
                (0, 1) => -math::exp(q),
                (1, 0) => math::exp(-q),
                (1, 1) => lambda,
                _ => 0.0,
            })
        }
        TlConvention::Consistent => {
            let upper = q_at(j).map_or(0.0, |q| -math::exp(-q));
            let lower = q_at(j - 1).map_or(0.0, math::exp);
            Mat::from_fn(2, 2, |r, c| match (r, c) {
                (0, 1) => upper,
                (1, 0) => lower,
                (1, 1) => lambda,
                _ => 0.0,
            })
        }
    })
}

/// `max_n || dL_n/dt + L_n M_n - M_{n+1} L_n ||_inf` with `dL_n/dt` assembled
/// from the candidate derivatives `qdot`, `pdot`.
///
/// With [`TlConvention::Printed`] on an open chain only the bonds
/// `n = 1..N-1` are checked, since the printed `M_{N+1}` would need a
/// position beyond the end of the chain.
pub fn discrete_lax_residual(
    state: &TodaState,
    lambda: f64,
    qdot: &[f64],
    pdot: &[f64],
    convention: TlConvention,
) -> Result<f64> {
    state.validate()?;
    let n = state.sites();
    if qdot.len() != n || pdot.len() != n {
        return Err(Error::Dimension(format!(
            "derivatives must have {n} entries, got {} and {}",
            qdot.len(),
            pdot.len()
        )));
    }
    let last = match (convention, state.boundary) {
        (TlConvention::Printed, Boundary::Open) => n - 1,
        _ => n,
    };
    let mut worst = 0.0f64;
    for site in 0..last {
        let l = tl_l(state, site, lambda, convention)?;
        let m = tl_m(state, site, lambda, convention)?;
        let m_next = tl_m(state, site + 1, lambda, convention)?;
        let (q, qd, pd) = (state.q[site], qdot[site], pdot[site]);
        let l_dot = match convention {
            TlConvention::Printed => Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => pd,
                (0, 1) => qd * math::exp(q),
                (1, 0) => qd * math::exp(-q),
                _ => 0.0,
            }),
            TlConvention::Consistent => Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => -pd,
                (0, 1) => -qd * math::exp(-q),
                (1, 0) => -qd * math::exp(q),
                _ => 0.0,
            }),
        };
        let r = l_dot.add(&l.matmul(&m)?)?.sub(&m_next.matmul(&l)?)?;
        worst = worst.max(r.max_abs());
    }
    Ok(worst)
}

fn gtl_pair(s: &GtlState) -> Result<(Mat, Mat)> {
    s.validate()?;
    let dim = s.dim();
    let mut l = Mat::zeros(dim, dim);
    let mut m = Mat::zeros(dim, dim);
    for i in 0..dim {
        l[(i, i)] = s.p[i];
    }
    for k in 0..dim - 1 {
        l[(k, k + 1)] = s.a[k];
        l[(k + 1, k)] = s.b[k];
        m[(k, k + 1)] = s.a[k];
        m[(k + 1, k)] = -s.b[k];
    }
    let (lo, hi) = (s.site(-1), s.site(1));
    l[(lo, hi)] = s.v;
    l[(hi, lo)] = s.u;
    m[(lo, hi)] = s.v;
    m[(hi, lo)] = -s.u;
    Ok((l, m))
}

/// Coordinate index (in [`crate::model::State::to_vec`] order) carried by
/// each entry of the banded generalized-lattice matrix, `None` for zeros.
pub fn gtl_entry_coordinates(n: usize) -> Vec<Vec<Option<usize>>> {
    let dim = 2 * n + 1;
    let (a0, b0) = (dim, dim + 2 * n);
    let (u, v) = (dim + 4 * n, dim + 4 * n + 1);
    let mut out = vec![vec![None; dim]; dim];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Some(i);
    }
    for k in 0..dim - 1 {
        out[k][k + 1] = Some(a0 + k);
        out[k + 1][k] = Some(b0 + k);
    }
    out[n - 1][n + 1] = Some(v);
    out[n + 1][n - 1] = Some(u);
    out
}

fn n3_pair(s: &N3State) -> (Mat, Mat) {
    let [p1, p2, p3] = s.p;
    let [a1, a2] = s.a;
    let u = s.u;
    let l = Mat::from_rows(&[[p1, a1, u], [a1, p2, a2], [u, a2, p3]]).expect("3x3");
    let m = Mat::from_rows(&[[0.0, a1, u], [-a1, 0.0, a2], [-u, -a2, 0.0]]).expect("3x3");
    (l, m)
}

/// Lower entries scaled by `d1`, `d2`, `d1 d2`. The lower partners of the
/// auxiliary pair are read as `(p4, q4)` themselves, so `d1 = d2 = 1`
/// reproduces the symmetric matrix of [`N3QState::to_n3`].
fn n3q_matrix(s: &N3QState, params: &RepParams) -> Mat {
    let (d1, d2) = (params.d1, params.d2);
    let a1 = s.a1();
    let a2 = s.a2();
    let u = s.u();
    Mat::from_rows(&[
        [s.p[0], a1, u],
        [d1 * a1, s.p[1], a2],
        [d1 * d2 * u, d2 * a2, s.p[2]],
    ])
    .expect("3x3")
}

fn n3pq_matrix(s: &N3PqState, params: &RepParams) -> Mat {
    let (d1, d2) = (params.d1, params.d2);
    let [p1, p2, p3, p4] = s.big_p;
    let [q1, q2, q3, q4] = s.big_q;
    let e1 = math::exp(q1);
    let e2 = math::exp(q2);
    let e12 = math::exp(q1 + q2);
    Mat::from_rows(&[
        [p1, e1 * p3, e12],
        [d1 * e1 * p4, p2 - p1, e2 * q3],
        [d1 * d2 * e12, d2 * e2 * q4, -p2],
    ])
    .expect("3x3")
}

/// Reference pair in squared variables: `L = [[c1, d2, w], [1, c2, d3], [0, 1, c3]]`,
/// `M = [[c1, 1, 0], [0, c2, 1], [0, 0, c3]]`.
fn cdw_pair(s: &CdwState) -> (Mat, Mat) {
    let [c1, c2, c3] = s.c;
    let l = Mat::from_rows(&[[c1, s.d2, s.w], [1.0, c2, s.d3], [0.0, 1.0, c3]]).expect("3x3");
    let m = Mat::from_rows(&[[c1, 1.0, 0.0], [0.0, c2, 1.0], [0.0, 0.0, c3]]).expect("3x3");
    (l, m)
}
