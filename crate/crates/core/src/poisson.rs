//! Linear Poisson brackets on the lattice coordinates, trace invariants,
//! Casimirs and Hamiltonian-flow consistency.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{self, FlowId};
use crate::error::{Error, Result};
use crate::lax::gtl_entry_coordinates;
use crate::matrix::Mat;
use crate::model::{GtlState, N3State, State};

/// Coefficient of the `{a1, a2}` (and banded `{a_-1, a_0}`, `{b_-1, b_0}`)
/// entries that makes the symmetric three-site flow Hamiltonian.
pub const N3_KAPPA: f64 = 1.0;
/// Coefficient of the coupled-bond entries for the banded lattice in
/// independent `(a, b)` coordinates.
pub const GTL_KAPPA: f64 = 2.0;
/// Value printed for the three-site coupling coefficient.
pub const PRINTED_N3_KAPPA: f64 = 2.0;
/// Hamilton's equations read `x' = SIGN * {H, x}`.
pub const SIGN: f64 = 1.0;
/// `C2 = a1 a2 / u - C2_P2_COEFFICIENT * p2` is conserved.
pub const C2_P2_COEFFICIENT: f64 = 1.0;
pub const PRINTED_C2_P2_COEFFICIENT: f64 = 2.0;

/// Step of the central-difference gradient.
pub const FD_STEP: f64 = 1e-6;

/// Linear expression `sum c_k x_k`.
pub type Linear = Vec<(usize, f64)>;

/// Sparse antisymmetric table of coordinate brackets, each entry linear in
/// the coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable {
    names: Vec<String>,
    entries: BTreeMap<(usize, usize), Linear>,
    kappa: f64,
}

impl BracketTable {
    fn empty(names: Vec<String>, kappa: f64) -> Self {
        Self { names, entries: BTreeMap::new(), kappa }
    }

    /// Adds `{x_i, x_j} += c x_k` (and the antisymmetric partner implicitly).
    fn add(&mut self, i: usize, j: usize, k: usize, c: f64) {
        let (key, c) = if i < j { ((i, j), c) } else { ((j, i), -c) };
        self.entries.entry(key).or_default().push((k, c));
    }

    /// Symmetric three-site bracket in coordinates `p1, p2, p3, a1, a2, u`.
    pub fn n3(kappa: f64) -> Self {
        let names = ["p1", "p2", "p3", "a1", "a2", "u"].iter().map(|s| s.to_string()).collect();
        let mut t = Self::empty(names, kappa);
        let (a1, a2, u) = (3, 4, 5);
        t.add(0, a1, a1, 1.0);
        t.add(1, a1, a1, -1.0);
        t.add(1, a2, a2, 1.0);
        t.add(2, a2, a2, -1.0);
        t.add(0, u, u, 1.0);
        t.add(2, u, u, -1.0);
        t.add(a1, a2, u, kappa);
        t
    }

    /// Banded bracket for sites `-N..=N`, coordinates ordered as
    /// [`State::to_vec`] on a generalized-lattice state.
    pub fn gtl(n: usize, kappa: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Precondition("generalized lattice needs N >= 1".into()));
        }
        let names = State::Gtl(GtlState::zeros(n)).field_names();
        let mut t = Self::empty(names, kappa);
        let dim = 2 * n + 1;
        let (a0, b0) = (dim, dim + 2 * n);
        let (u, v) = (dim + 4 * n, dim + 4 * n + 1);
        for k in 0..2 * n {
            t.add(k, a0 + k, a0 + k, 1.0);
            t.add(k + 1, a0 + k, a0 + k, -1.0);
            t.add(k, b0 + k, b0 + k, 1.0);
            t.add(k + 1, b0 + k, b0 + k, -1.0);
        }
        let (lo, hi) = (n - 1, n + 1);
        t.add(lo, u, u, 1.0);
        t.add(hi, u, u, -1.0);
        t.add(lo, v, v, 1.0);
        t.add(hi, v, v, -1.0);
        // bonds -1 and 0 sit at storage offsets n - 1 and n
        t.add(a0 + n - 1, a0 + n, v, kappa);
        t.add(b0 + n - 1, b0 + n, u, kappa);
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
    }

    /// `{x_i, x_j}` evaluated at `x`.
    pub fn eval(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        let (key, sign) = match i.cmp(&j) {
            core::cmp::Ordering::Less => ((i, j), 1.0),
            core::cmp::Ordering::Greater => ((j, i), -1.0),
            core::cmp::Ordering::Equal => return 0.0,
        };
        self.entries
            .get(&key)
            .map_or(0.0, |lin| sign * lin.iter().map(|(k, c)| c * x[*k]).sum::<f64>())
    }

    /// Poisson tensor `J_ij = {x_i, x_j}` at `x`.
    pub fn tensor(&self, x: &[f64]) -> Mat {
        let d = self.dim();
        Mat::from_fn(d, d, |i, j| self.eval(i, j, x))
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "bracket table has {} coordinates, point has {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

/// Table matching the coordinates of `state` (three-site or banded).
pub fn table_for(state: &State, kappa: f64) -> Result<BracketTable> {
    match state {
        State::N3(_) => Ok(BracketTable::n3(kappa)),
        State::Gtl(s) => BracketTable::gtl(s.n, kappa),
        other => Err(Error::KindMismatch { expected: "n3 or gtl", found: other.kind().name() }),
    }
}

/// Evaluates `{xi, xj}` by coordinate name.
pub fn bracket_coord(table: &BracketTable, xi: &str, xj: &str, state: &State) -> Result<f64> {
    let x = state.to_vec();
    table.check_len(&x)?;
    Ok(table.eval(table.index_of(xi)?, table.index_of(xj)?, &x))
}

/// Scalar function of the coordinate vector.
pub trait Observable {
    fn value(&self, x: &[f64]) -> f64;

    /// Defaults to a central difference with step [`FD_STEP`].
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        fd_gradient(|y| self.value(y), x)
    }
}

impl<O: Observable + ?Sized> Observable for &O {
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
}

pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = FD_STEP * x[i].abs().max(1.0);
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Closure observable, differentiated numerically.
pub struct FnObservable<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Observable for FnObservable<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

/// Forces finite-difference gradients on an observable.
pub struct FiniteDiff<O>(pub O);

impl<O: Observable> Observable for FiniteDiff<O> {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }
}

/// Sparse polynomial `sum c * prod x_i^e_i` with exact gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub dim: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Poly {
    pub fn constant(dim: usize, c: f64) -> Self {
        Self { dim, terms: vec![(c, vec![0; dim])] }
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self { dim, terms: vec![(1.0, e)] }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { dim: self.dim, terms }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(c, e)| (c * s, e.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, e1) in &self.terms {
            for (c2, e2) in &other.terms {
                terms.push((c1 * c2, e1.iter().zip(e2).map(|(a, b)| a + b).collect()));
            }
        }
        Self { dim: self.dim, terms }
    }

    fn monomial(e: &[u32], x: &[f64]) -> f64 {
        e.iter().zip(x).fold(1.0, |acc, (k, xi)| acc * powi(*xi, *k))
    }
}

fn powi(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * x)
}

impl Observable for Poly {
    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * Self::monomial(e, x)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (c, e) in &self.terms {
            for i in 0..self.dim {
                if e[i] == 0 {
                    continue;
                }
                let mut ei = e.clone();
                ei[i] -= 1;
                g[i] += c * e[i] as f64 * Self::monomial(&ei, x);
            }
        }
        g
    }
}

/// Coordinate carried by each entry of the Lax matrix.
pub type EntryMap = Vec<Vec<Option<usize>>>;

/// Entry map of the symmetric three-site matrix.
pub fn n3_entry_coordinates() -> EntryMap {
    let s = Some;
    vec![
        vec![s(0), s(3), s(5)],
        vec![s(3), s(1), s(4)],
        vec![s(5), s(4), s(2)],
    ]
}

pub fn entry_map_for(state: &State) -> Result<EntryMap> {
    match state {
        State::N3(_) => Ok(n3_entry_coordinates()),
        State::Gtl(s) => Ok(gtl_entry_coordinates(s.n)),
        other => Err(Error::KindMismatch { expected: "n3 or gtl", found: other.kind().name() }),
    }
}

fn matrix_from(map: &EntryMap, x: &[f64]) -> Mat {
    let n = map.len();
    Mat::from_fn(n, n, |i, j| map[i][j].map_or(0.0, |k| x[k]))
}

/// `H_k = tr(L^k) / k` with the exact gradient `(L^{k-1})^T` pulled back
/// through the entry map.
#[derive(Clone, Debug)]
pub struct TraceInvariant {
    pub k: u32,
    pub map: EntryMap,
}

impl TraceInvariant {
    pub fn new(k: u32, map: EntryMap) -> Self {
        Self { k, map }
    }
}

impl Observable for TraceInvariant {
    fn value(&self, x: &[f64]) -> f64 {
        let l = matrix_from(&self.map, x);
        l.pow(self.k).expect("square").trace() / self.k as f64
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let l = matrix_from(&self.map, x);
        let lk = l.pow(self.k - 1).expect("square");
        let mut g = vec![0.0; x.len()];
        for (i, row) in self.map.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if let Some(c) = e {
                    g[*c] += lk[(j, i)];
                }
            }
        }
        g
    }
}

/// `a1 a2 / u - coeff * p2` on three-site coordinates.
#[derive(Clone, Copy, Debug)]
pub struct CasimirC2 {
    pub p2_coefficient: f64,
}

impl Observable for CasimirC2 {
    fn value(&self, x: &[f64]) -> f64 {
        x[3] * x[4] / x[5] - self.p2_coefficient * x[1]
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (a1, a2, u) = (x[3], x[4], x[5]);
        vec![0.0, -self.p2_coefficient, 0.0, a2 / u, a1 / u, -a1 * a2 / (u * u)]
    }
}

/// `sum_ij dF/dx_i dG/dx_j {x_i, x_j}`.
pub fn bracket_fn(table: &BracketTable, f: &impl Observable, g: &impl Observable, x: &[f64]) -> Result<f64> {
    table.check_len(x)?;
    Ok(bracket_grads(table, &f.gradient(x), &g.gradient(x), x))
}

fn bracket_grads(table: &BracketTable, gf: &[f64], gg: &[f64], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&(i, j), lin) in &table.entries {
        let val: f64 = lin.iter().map(|(k, c)| c * x[*k]).sum();
        s += val * (gf[i] * gg[j] - gf[j] * gg[i]);
    }
    s
}

/// Hamiltonian vector field `x'_k = SIGN * {H, x_k}`.
pub fn hamiltonian_vector_field(table: &BracketTable, h: &impl Observable, x: &[f64]) -> Result<Vec<f64>> {
    table.check_len(x)?;
    let gh = h.gradient(x);
    let d = table.dim();
    Ok((0..d)
        .map(|k| SIGN * (0..d).map(|i| gh[i] * table.eval(i, k, x)).sum::<f64>())
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSet {
    /// `H_1..H_kmax`.
    pub h: Vec<f64>,
    /// `C1 = H1`; `C2`, `C3` only for the three-site system with `u != 0`.
    pub c1: f64,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    /// Diagnostic `p4 q4 + alpha exp(p4 q4)` for q-coordinate states.
    pub c4: Option<f64>,
}

impl InvariantSet {
    pub fn casimirs(&self) -> [Option<f64>; 3] {
        [Some(self.c1), self.c2, self.c3]
    }
}

pub const MAX_INVARIANT_ORDER: usize = 4;

fn check_kmax(kmax: usize) -> Result<()> {
    if kmax == 0 || kmax > MAX_INVARIANT_ORDER {
        return Err(Error::Precondition(format!("kmax must be in 1..={MAX_INVARIANT_ORDER}, got {kmax}")));
    }
    Ok(())
}

/// Trace invariants and Casimirs. Accepts three-site, q-coordinate (via the
/// symmetric matrix) and banded states.
pub fn invariants(state: &State, kmax: usize) -> Result<InvariantSet> {
    check_kmax(kmax)?;
    state.validate()?;
    let (s, c4) = match state {
        State::N3Q(q) => (State::N3(q.to_n3()), Some(q.c4())),
        other => (other.clone(), None),
    };
    let map = entry_map_for(&s)?;
    let x = s.to_vec();
    let h: Vec<f64> = (1..=kmax as u32).map(|k| TraceInvariant::new(k, map.clone()).value(&x)).collect();
    let c1 = matrix_from(&map, &x).trace();
    let (c2, c3) = match &s {
        State::N3(n3) => (
            casimir_c2(n3, C2_P2_COEFFICIENT),
            if n3.u != 0.0 { Some(1.0) } else { None },
        ),
        _ => (None, None),
    };
    Ok(InvariantSet { h, c1, c2, c3, c4 })
}

/// `a1 a2 / u - coeff p2`, absent when `u = 0`.
pub fn casimir_c2(s: &N3State, p2_coefficient: f64) -> Option<f64> {
    (s.u != 0.0).then(|| s.a[0] * s.a[1] / s.u - p2_coefficient * s.p[1])
}

/// Max over coordinates of `|SIGN {H2, x} - rhs_x|`, with `H2 = tr(L^2)/2`
/// and the bracket built with coefficient `kappa`. The reference is the
/// canonical flow of the state's kind.
pub fn ham_flow_residual(state: &State, kappa: f64) -> Result<f64> {
    let flow = match state {
        State::N3(_) => FlowId::N3,
        State::Gtl(_) => FlowId::Gtl,
        other => return Err(Error::KindMismatch { expected: "n3 or gtl", found: other.kind().name() }),
    };
    let (vf, reference) = ham_flow_pair(state, kappa, flow)?;
    Ok(vf.iter().zip(&reference).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

fn ham_flow_pair(state: &State, kappa: f64, flow: FlowId) -> Result<(Vec<f64>, Vec<f64>)> {
    state.validate()?;
    let table = table_for(state, kappa)?;
    let x = state.to_vec();
    let h2 = TraceInvariant::new(2, entry_map_for(state)?);
    let vf = hamiltonian_vector_field(&table, &h2, &x)?;
    let reference = dynamics::rhs(state, flow)?.to_vec();
    Ok((vf, reference))
}

/// Outcome of fitting the coupling coefficient and sign convention to a flow.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub kappa: f64,
    pub sign: f64,
    /// Worst residual over the sample at the fitted coefficient.
    pub residual: f64,
}

/// Fits `kappa` by least squares (the Hamiltonian field is affine in it) and
/// pins the sign from the first coordinate with a nonzero reference value.
pub fn resolve_bracket(states: &[State]) -> Result<Resolution> {
    if states.is_empty() {
        return Err(Error::Precondition("no states to resolve against".into()));
    }
    let mut sign = 0.0;
    let (mut num, mut den) = (0.0, 0.0);
    let mut pairs = Vec::with_capacity(states.len());
    for s in states {
        let flow = if matches!(s, State::Gtl(_)) { FlowId::Gtl } else { FlowId::N3 };
        let (f0, r) = ham_flow_pair(s, 0.0, flow)?;
        let (f1, _) = ham_flow_pair(s, 1.0, flow)?;
        if sign == 0.0 {
            if let Some(i) = (0..r.len()).find(|&i| r[i].abs() > 1e-8 && f0[i].abs() > 1e-8) {
                sign = if (r[i] > 0.0) == (SIGN * f0[i] > 0.0) { 1.0 } else { -1.0 };
            }
        }
        pairs.push((f0, f1, r));
    }
    if sign == 0.0 {
        return Err(Error::Precondition("sample has no non-degenerate state to pin the sign".into()));
    }
    for (f0, f1, r) in &pairs {
        for i in 0..r.len() {
            let d = sign * (f1[i] - f0[i]);
            num += d * (r[i] - sign * f0[i]);
            den += d * d;
        }
    }
    let kappa = if den > 0.0 { num / den } else { 0.0 };
    let mut residual: f64 = 0.0;
    for (f0, f1, r) in &pairs {
        for i in 0..r.len() {
            let v = sign * (f0[i] + kappa * (f1[i] - f0[i]));
            residual = residual.max((v - r[i]).abs());
        }
    }
    Ok(Resolution { kappa, sign, residual })
}

/// Gradient mode for [`involution_matrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gradients {
    Analytic,
    FiniteDifference,
}

/// `|{H_i, H_j}|` for `i, j` in `1..=kmax`.
pub fn involution_matrix(table: &BracketTable, state: &State, kmax: usize, mode: Gradients) -> Result<Mat> {
    check_kmax(kmax)?;
    let map = entry_map_for(state)?;
    let x = state.to_vec();
    table.check_len(&x)?;
    let grads: Vec<Vec<f64>> = (1..=kmax as u32)
        .map(|k| {
            let h = TraceInvariant::new(k, map.clone());
            match mode {
                Gradients::Analytic => h.gradient(&x),
                Gradients::FiniteDifference => FiniteDiff(h).gradient(&x),
            }
        })
        .collect();
    Ok(Mat::from_fn(kmax, kmax, |i, j| {
        if i == j {
            0.0
        } else {
            bracket_grads(table, &grads[i], &grads[j], &x).abs()
        }
    }))
}

fn inner<'a>(table: &'a BracketTable, a: &'a dyn Observable, b: &'a dyn Observable) -> impl Observable + 'a {
    FnObservable(move |y: &[f64]| bracket_grads(table, &a.gradient(y), &b.gradient(y), y))
}

/// `|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}|`, inner brackets differentiated
/// numerically.
pub fn jacobi_residual(
    table: &BracketTable,
    f: &impl Observable,
    g: &impl Observable,
    h: &impl Observable,
    x: &[f64],
) -> Result<f64> {
    table.check_len(x)?;
    let (fd, gd, hd): (&dyn Observable, &dyn Observable, &dyn Observable) = (f, g, h);
    let t1 = bracket_fn(table, &fd, &inner(table, gd, hd), x)?;
    let t2 = bracket_fn(table, &gd, &inner(table, hd, fd), x)?;
    let t3 = bracket_fn(table, &hd, &inner(table, fd, gd), x)?;
    Ok((t1 + t2 + t3).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gtl_from_n3;

    fn n3(p: [f64; 3], a: [f64; 2], u: f64) -> State {
        State::N3(N3State::new(p, a, u))
    }

    #[test]
    fn coordinate_brackets() {
        let t = BracketTable::n3(1.0);
        let s = n3([0.0; 3], [3.0, 0.0], 2.0);
        assert_eq!(bracket_coord(&t, "p1", "a1", &s).unwrap(), 3.0);
        assert_eq!(bracket_coord(&t, "a1", "p1", &s).unwrap(), -3.0);
        assert_eq!(bracket_coord(&t, "p1", "p2", &s).unwrap(), 0.0);
        assert_eq!(bracket_coord(&t, "a1", "a2", &s).unwrap(), 2.0);
        assert!(matches!(bracket_coord(&t, "q9", "p1", &s), Err(Error::UnknownCoordinate(_))));
    }

    #[test]
    fn hamiltonian_gives_momentum_rate() {
        let t = BracketTable::n3(1.0);
        let s = n3([0.0; 3], [1.0, 1.0], 0.0);
        let x = s.to_vec();
        let h2 = TraceInvariant::new(2, n3_entry_coordinates());
        let v = bracket_fn(&t, &h2, &Poly::coordinate(6, 0), &x).unwrap();
        assert_eq!(SIGN * v, -2.0);
        assert_eq!(bracket_fn(&t, &h2, &h2, &x).unwrap(), 0.0);
    }

    #[test]
    fn invariant_examples() {
        let inv = invariants(&n3([1.0, 2.0, 3.0], [0.0, 0.0], 0.0), 2).unwrap();
        assert_eq!(inv.h, vec![6.0, 7.0]);
        assert!(inv.c2.is_none() && inv.c3.is_none());
        let inv = invariants(&n3([0.0; 3], [1.0, 1.0], 0.0), 2).unwrap();
        assert_eq!(inv.h[1], 2.0);
        let inv = invariants(&n3([0.0; 3], [1.0, 1.0], 1.0), 2).unwrap();
        assert_eq!(inv.c2, Some(1.0));
        assert_eq!(inv.c3, Some(1.0));
        assert!(invariants(&n3([0.0; 3], [1.0, 1.0], 1.0), 5).is_err());
    }

    #[test]
    fn trace_gradient_matches_differences() {
        let x = [0.3, -0.7, 1.1, 0.4, -0.9, 0.6];
        for k in 1..=4 {
            let h = TraceInvariant::new(k, n3_entry_coordinates());
            let ga = h.gradient(&x);
            let gf = FiniteDiff(h).gradient(&x);
            for (a, b) in ga.iter().zip(&gf) {
                assert!((a - b).abs() < 1e-7, "k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn casimir_gradient_matches_differences() {
        let x = [0.3, -0.7, 1.1, 0.4, -0.9, 0.6];
        let c = CasimirC2 { p2_coefficient: 1.0 };
        let ga = c.gradient(&x);
        let gf = FiniteDiff(c).gradient(&x);
        for (a, b) in ga.iter().zip(&gf) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn printed_coupling_overproduces() {
        let s = n3([0.0; 3], [0.0, 1.0], 1.0);
        assert!(ham_flow_residual(&s, 1.0).unwrap() < 1e-14);
        assert!((ham_flow_residual(&s, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let rest = n3([0.5; 3], [0.0, 0.0], 0.0);
        assert_eq!(ham_flow_residual(&rest, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn resolution_pins_unit_coupling() {
        let states = [
            n3([0.1, -0.4, 0.3], [0.8, -1.2], 0.7),
            n3([1.0, 0.2, -0.5], [0.3, 0.9], -1.1),
        ];
        let r = resolve_bracket(&states).unwrap();
        assert!((r.kappa - 1.0).abs() < 1e-12);
        assert_eq!(r.sign, 1.0);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn banded_table_fits_with_coupling_two() {
        let mut g = gtl_from_n3(&N3State::new([0.1, -0.4, 0.3], [0.8, -1.2], 0.7));
        g.b = vec![0.5, 1.3];
        g.v = -0.4;
        let s = State::Gtl(g);
        assert!(ham_flow_residual(&s, GTL_KAPPA).unwrap() < 1e-12);
        let r = resolve_bracket(&[s]).unwrap();
        assert!((r.kappa - 2.0).abs() < 1e-12);
    }

    #[test]
    fn banded_table_is_antisymmetric() {
        let t = BracketTable::gtl(2, 2.0).unwrap();
        let x: Vec<f64> = (0..t.dim()).map(|i| 0.1 * i as f64 - 0.7).collect();
        let j = t.tensor(&x);
        assert_eq!(j.add(&j.transpose()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn involution_at_coupled_state() {
        let s = n3([0.0; 3], [1.0, 1.0], 1.0);
        let t = BracketTable::n3(1.0);
        let m = involution_matrix(&t, &s, 4, Gradients::Analytic).unwrap();
        assert!(m.max_abs() <= 1e-9);
        for i in 0..4 {
            assert_eq!(m[(i, i)], 0.0);
        }
    }

    #[test]
    fn jacobi_for_linear_functions() {
        let t = BracketTable::n3(1.0);
        let x = [0.3, -0.7, 1.1, 0.4, -0.9, 0.6];
        let r = jacobi_residual(&t, &Poly::coordinate(6, 3), &Poly::coordinate(6, 4), &Poly::coordinate(6, 0), &x)
            .unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn poly_gradient() {
        let p = Poly::coordinate(3, 0).mul(&Poly::coordinate(3, 1)).add(&Poly::constant(3, 2.0));
        assert_eq!(p.value(&[2.0, 3.0, 5.0]), 8.0);
        assert_eq!(p.gradient(&[2.0, 3.0, 5.0]), vec![3.0, 2.0, 0.0]);
    }
}
