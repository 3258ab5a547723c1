//! State types for every coordinate representation of the lattice and the
//! exact transforms between them.
//!
//! Generalized-lattice sites are indexed `-N..=N`; the helpers on
//! [`GtlState`] take signed site indices and hide the storage offset.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Positions and momenta of the classic chain.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub boundary: Boundary,
}

impl TodaState {
    pub fn new(q: Vec<f64>, p: Vec<f64>, boundary: Boundary) -> Result<Self> {
        let s = Self { q, p, boundary };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q.len() != self.p.len() {
            return Err(Error::Dimension(format!(
                "q has {} sites, p has {}",
                self.q.len(),
                self.p.len()
            )));
        }
        if self.q.len() < 2 {
            return Err(Error::Precondition("a chain needs at least 2 sites".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.q.len()
    }

    /// Number of nearest-neighbour bonds: `N - 1` open, `N` periodic.
    pub fn bonds(&self) -> usize {
        match self.boundary {
            Boundary::Open => self.sites() - 1,
            Boundary::Periodic => self.sites(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlaschkaVariant {
    /// `alpha_n = exp(q_n - q_{n+1})`, `beta_n = p_n`.
    AlphaBeta,
    /// `a_n = exp((q_n - q_{n+1}) / 2) / 2`, `b_n = -p_n / 2`.
    AB,
}

/// Bond variables (`first`, one per bond) and site variables (`second`).
#[derive(Clone, Debug, PartialEq)]
pub struct FlaschkaState {
    pub variant: FlaschkaVariant,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub boundary: Boundary,
}

impl FlaschkaState {
    pub fn validate(&self) -> Result<()> {
        let n = self.second.len();
        let bonds = match self.boundary {
            Boundary::Open => n.saturating_sub(1),
            Boundary::Periodic => n,
        };
        if n < 2 || self.first.len() != bonds {
            return Err(Error::Dimension(format!(
                "{} sites need {bonds} bond variables, found {}",
                n,
                self.first.len()
            )));
        }
        Ok(())
    }
}

/// Generalized lattice on sites `-N..=N`: diagonal `p`, upper band `a`,
/// lower band `b` (bond `k` joins sites `k` and `k + 1`), plus the two
/// couplings `u` (below) and `v` (above) between sites `-1` and `+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GtlState {
    pub n: usize,
    pub p: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub u: f64,
    pub v: f64,
}

impl GtlState {
    pub fn new(n: usize, p: Vec<f64>, a: Vec<f64>, b: Vec<f64>, u: f64, v: f64) -> Result<Self> {
        let s = Self { n, p, a, b, u, v };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            p: vec![0.0; 2 * n + 1],
            a: vec![0.0; 2 * n],
            b: vec![0.0; 2 * n],
            u: 0.0,
            v: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Precondition("generalized lattice needs N >= 1".into()));
        }
        if self.p.len() != 2 * self.n + 1 || self.a.len() != 2 * self.n || self.b.len() != 2 * self.n {
            return Err(Error::Dimension(format!(
                "N = {} needs p/a/b of lengths {}/{}/{}, found {}/{}/{}",
                self.n,
                2 * self.n + 1,
                2 * self.n,
                2 * self.n,
                self.p.len(),
                self.a.len(),
                self.b.len()
            )));
        }
        let finite = self.p.iter().chain(&self.a).chain(&self.b).all(|x| x.is_finite())
            && self.u.is_finite()
            && self.v.is_finite();
        if !finite {
            return Err(Error::Domain("non-finite field".into()));
        }
        Ok(())
    }

    /// Matrix dimension `2N + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// True iff the state is a classic lattice (`u = v = 0`).
    pub fn is_classic(&self) -> bool {
        self.u == 0.0 && self.v == 0.0
    }

    /// Storage offset of site `k`.
    pub fn site(&self, k: isize) -> usize {
        (k + self.n as isize) as usize
    }

    pub fn p_at(&self, k: isize) -> f64 {
        self.get_site(&self.p, k)
    }

    pub fn a_at(&self, k: isize) -> f64 {
        self.get_bond(&self.a, k)
    }

    pub fn b_at(&self, k: isize) -> f64 {
        self.get_bond(&self.b, k)
    }

    /// Site value, or 0 outside `-N..=N`.
    fn get_site(&self, v: &[f64], k: isize) -> f64 {
        let n = self.n as isize;
        if (-n..=n).contains(&k) {
            v[(k + n) as usize]
        } else {
            0.0
        }
    }

    /// Bond value, or 0 outside `-N..N`.
    fn get_bond(&self, v: &[f64], k: isize) -> f64 {
        let n = self.n as isize;
        if (-n..n).contains(&k) {
            v[(k + n) as usize]
        } else {
            0.0
        }
    }
}

/// Symmetric three-site specialization: `b = a`, `v = u`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct N3State {
    pub p: [f64; 3],
    pub a: [f64; 2],
    pub u: f64,
}

impl N3State {
    pub fn new(p: [f64; 3], a: [f64; 2], u: f64) -> Self {
        Self { p, a, u }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.iter().chain(&self.a).all(|x| x.is_finite()) && self.u.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain("non-finite field".into()))
        }
    }
}

/// Positions/momenta form of the three-site system with the auxiliary pair
/// `(p4, q4)`: `a1 = e^{q1-q2} p4`, `a2 = e^{q2-q3} q4`, `u = u0 e^{q1-q3}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct N3QState {
    pub q: [f64; 3],
    pub p: [f64; 3],
    pub p4: f64,
    pub q4: f64,
    pub u0: f64,
    /// Constant entering the `C4` diagnostic.
    pub alpha: f64,
}

impl N3QState {
    pub fn a1(&self) -> f64 {
        math::exp(self.q[0] - self.q[1]) * self.p4
    }

    pub fn a2(&self) -> f64 {
        math::exp(self.q[1] - self.q[2]) * self.q4
    }

    pub fn u(&self) -> f64 {
        self.u0 * math::exp(self.q[0] - self.q[2])
    }

    /// `p4 q4 + alpha e^{p4 q4}`; tracked as a diagnostic only.
    pub fn c4(&self) -> f64 {
        let x = self.p4 * self.q4;
        x + self.alpha * math::exp(x)
    }

    pub fn to_n3(&self) -> N3State {
        N3State {
            p: self.p,
            a: [self.a1(), self.a2()],
            u: self.u(),
        }
    }
}

/// Canonical pairs `(P_i, Q_i)`, `i = 1..4`, of the alternative three-site
/// Lax matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct N3PqState {
    pub big_p: [f64; 4],
    pub big_q: [f64; 4],
}

/// Squared variables `c_k = p_k`, `d2 = a1^2`, `d3 = a2^2`, `w = u^2` (on the
/// doubled time scale). `branch` is the sign of `u a1 a2`, which the squares
/// lose and the coupled flow needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdwState {
    pub c: [f64; 3],
    pub d2: f64,
    pub d3: f64,
    pub w: f64,
    pub branch: f64,
}

impl Default for CdwState {
    fn default() -> Self {
        Self {
            c: [0.0; 3],
            d2: 0.0,
            d3: 0.0,
            w: 0.0,
            branch: 1.0,
        }
    }
}

impl CdwState {
    pub fn new(c: [f64; 3], d2: f64, d3: f64, w: f64) -> Self {
        Self {
            c,
            d2,
            d3,
            w,
            branch: 1.0,
        }
    }

    /// Recovers a symmetric three-site state with `a1, a2 >= 0` and the sign
    /// of `u` taken from `branch`. Fails on negative squares.
    pub fn to_n3(&self) -> Result<N3State> {
        if self.d2 < 0.0 || self.d3 < 0.0 || self.w < 0.0 {
            return Err(Error::Domain(format!(
                "negative square (d2 = {}, d3 = {}, w = {})",
                self.d2, self.d3, self.w
            )));
        }
        Ok(N3State {
            p: self.c,
            a: [math::sqrt(self.d2), math::sqrt(self.d3)],
            u: self.branch.signum() * math::sqrt(self.w),
        })
    }
}

/// Constants of the asymmetric Lax representations and the optional
/// spectral parameter of the 2x2 pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepParams {
    pub d1: f64,
    pub d2: f64,
    /// Ratio `v / u`; 1 for the symmetric system.
    pub d3: f64,
    pub lambda: Option<f64>,
}

impl Default for RepParams {
    fn default() -> Self {
        Self {
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
            lambda: None,
        }
    }
}

pub fn flaschka_from_qp(s: &TodaState, variant: FlaschkaVariant) -> Result<FlaschkaState> {
    s.validate()?;
    let n = s.sites();
    let diff = |i: usize| s.q[i] - s.q[(i + 1) % n];
    let bonds = s.bonds();
    let (first, second) = match variant {
        FlaschkaVariant::AlphaBeta => (
            (0..bonds).map(|i| math::exp(diff(i))).collect(),
            s.p.clone(),
        ),
        FlaschkaVariant::AB => (
            (0..bonds).map(|i| 0.5 * math::exp(0.5 * diff(i))).collect(),
            s.p.iter().map(|p| -0.5 * p).collect(),
        ),
    };
    Ok(FlaschkaState {
        variant,
        first,
        second,
        boundary: s.boundary,
    })
}

/// Position differences `q_n - q_{n+1}` recovered from the bond variables.
pub fn bond_differences(f: &FlaschkaState) -> Result<Vec<f64>> {
    f.first
        .iter()
        .map(|&x| {
            if x <= 0.0 {
                return Err(Error::Domain(format!("bond variable {x} is not positive")));
            }
            Ok(match f.variant {
                FlaschkaVariant::AlphaBeta => math::ln(x),
                FlaschkaVariant::AB => 2.0 * math::ln(2.0 * x),
            })
        })
        .collect()
}

/// `q_n = ln(tau_{n-1} / tau_n)`.
pub fn qn_from_tau(tau_prev: f64, tau_n: f64) -> Result<f64> {
    if !(tau_prev > 0.0 && tau_n > 0.0) {
        return Err(Error::Domain(format!(
            "tau values must be positive, got ({tau_prev}, {tau_n})"
        )));
    }
    Ok(math::ln(tau_prev / tau_n))
}

/// Pointwise squaring map; the halved time scale is the caller's contract.
pub fn cdw_from_n3(s: &N3State) -> CdwState {
    let sign = s.u * s.a[0] * s.a[1];
    CdwState {
        c: s.p,
        d2: s.a[0] * s.a[0],
        d3: s.a[1] * s.a[1],
        w: s.u * s.u,
        branch: if sign < 0.0 { -1.0 } else { 1.0 },
    }
}

/// Embeds the symmetric three-site state into the `N = 1` container.
pub fn gtl_from_n3(s: &N3State) -> GtlState {
    GtlState {
        n: 1,
        p: s.p.to_vec(),
        a: s.a.to_vec(),
        b: s.a.to_vec(),
        u: s.u,
        v: s.u,
    }
}

/// Which flow-carrying state a [`State`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Toda,
    Flaschka,
    Gtl,
    N3,
    N3Q,
    Cdw,
}

impl StateKind {
    pub fn name(self) -> &'static str {
        match self {
            StateKind::Toda => "toda",
            StateKind::Flaschka => "flaschka",
            StateKind::Gtl => "gtl",
            StateKind::N3 => "n3",
            StateKind::N3Q => "n3q",
            StateKind::Cdw => "cdw",
        }
    }
}

/// Any state a flow can act on. Derivatives are returned in the same shape.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Toda(TodaState),
    Flaschka(FlaschkaState),
    Gtl(GtlState),
    N3(N3State),
    N3Q(N3QState),
    Cdw(CdwState),
}

impl State {
    pub fn kind(&self) -> StateKind {
        match self {
            State::Toda(_) => StateKind::Toda,
            State::Flaschka(_) => StateKind::Flaschka,
            State::Gtl(_) => StateKind::Gtl,
            State::N3(_) => StateKind::N3,
            State::N3Q(_) => StateKind::N3Q,
            State::Cdw(_) => StateKind::Cdw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            State::Toda(s) => s.validate(),
            State::Flaschka(s) => s.validate(),
            State::Gtl(s) => s.validate(),
            State::N3(s) => s.validate(),
            _ => {
                if self.to_vec().iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Domain("non-finite field".into()))
                }
            }
        }
    }

    /// Evolving fields flattened in a fixed order (see [`State::field_names`]).
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            State::Toda(s) => s.q.iter().chain(&s.p).copied().collect(),
            State::Flaschka(s) => s.first.iter().chain(&s.second).copied().collect(),
            State::Gtl(s) => {
                let mut v: Vec<f64> = s.p.iter().chain(&s.a).chain(&s.b).copied().collect();
                v.push(s.u);
                v.push(s.v);
                v
            }
            State::N3(s) => vec![s.p[0], s.p[1], s.p[2], s.a[0], s.a[1], s.u],
            State::N3Q(s) => vec![s.q[0], s.q[1], s.q[2], s.p[0], s.p[1], s.p[2], s.p4, s.q4],
            State::Cdw(s) => vec![s.c[0], s.c[1], s.c[2], s.d2, s.d3, s.w],
        }
    }

    /// Same shape and constants as `self`, evolving fields replaced by `y`.
    pub fn with_values(&self, y: &[f64]) -> Result<State> {
        let expected = self.to_vec().len();
        if y.len() != expected {
            return Err(Error::Dimension(format!(
                "{} state has {expected} fields, got {}",
                self.kind().name(),
                y.len()
            )));
        }
        Ok(match self {
            State::Toda(s) => {
                let n = s.q.len();
                State::Toda(TodaState {
                    q: y[..n].to_vec(),
                    p: y[n..].to_vec(),
                    boundary: s.boundary,
                })
            }
            State::Flaschka(s) => {
                let m = s.first.len();
                State::Flaschka(FlaschkaState {
                    variant: s.variant,
                    first: y[..m].to_vec(),
                    second: y[m..].to_vec(),
                    boundary: s.boundary,
                })
            }
            State::Gtl(s) => {
                let np = s.p.len();
                let nb = s.a.len();
                State::Gtl(GtlState {
                    n: s.n,
                    p: y[..np].to_vec(),
                    a: y[np..np + nb].to_vec(),
                    b: y[np + nb..np + 2 * nb].to_vec(),
                    u: y[np + 2 * nb],
                    v: y[np + 2 * nb + 1],
                })
            }
            State::N3(_) => State::N3(N3State {
                p: [y[0], y[1], y[2]],
                a: [y[3], y[4]],
                u: y[5],
            }),
            State::N3Q(s) => State::N3Q(N3QState {
                q: [y[0], y[1], y[2]],
                p: [y[3], y[4], y[5]],
                p4: y[6],
                q4: y[7],
                ..*s
            }),
            State::Cdw(s) => State::Cdw(CdwState {
                c: [y[0], y[1], y[2]],
                d2: y[3],
                d3: y[4],
                w: y[5],
                branch: s.branch,
            }),
        })
    }

    /// Column names matching [`State::to_vec`]. Sites of the generalized
    /// lattice carry their signed index, e.g. `p_-1`.
    pub fn field_names(&self) -> Vec<String> {
        let indexed = |prefix: &str, n: usize| -> Vec<String> {
            (1..=n).map(|i| format!("{prefix}{i}")).collect()
        };
        match self {
            State::Toda(s) => {
                let mut v = indexed("q", s.q.len());
                v.extend(indexed("p", s.p.len()));
                v
            }
            State::Flaschka(s) => {
                let (f, g) = match s.variant {
                    FlaschkaVariant::AlphaBeta => ("alpha", "beta"),
                    FlaschkaVariant::AB => ("a", "b"),
                };
                let mut v = indexed(f, s.first.len());
                v.extend(indexed(g, s.second.len()));
                v
            }
            State::Gtl(s) => {
                let n = s.n as isize;
                let mut v: Vec<String> = (-n..=n).map(|k| format!("p_{k}")).collect();
                v.extend((-n..n).map(|k| format!("a_{k}")));
                v.extend((-n..n).map(|k| format!("b_{k}")));
                v.push("u".to_string());
                v.push("v".to_string());
                v
            }
            State::N3(_) => ["p1", "p2", "p3", "a1", "a2", "u"].iter().map(|s| s.to_string()).collect(),
            State::N3Q(_) => ["q1", "q2", "q3", "p1", "p2", "p3", "p4", "q4"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            State::Cdw(_) => ["c1", "c2", "c3", "d2", "d3", "w"].iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flaschka_zero_positions() {
        let s = TodaState::new(vec![0.0; 3], vec![0.0; 3], Boundary::Open).unwrap();
        let f = flaschka_from_qp(&s, FlaschkaVariant::AlphaBeta).unwrap();
        assert_eq!(f.first, vec![1.0, 1.0]);
        assert_eq!(f.second, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn flaschka_alpha_of_ln2() {
        let s = TodaState::new(vec![core::f64::consts::LN_2, 0.0], vec![0.0, 0.0], Boundary::Open).unwrap();
        let f = flaschka_from_qp(&s, FlaschkaVariant::AlphaBeta).unwrap();
        assert_relative_eq!(f.first[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn flaschka_ab_variant() {
        let s = TodaState::new(vec![0.0, 0.0], vec![3.0, -1.0], Boundary::Open).unwrap();
        let f = flaschka_from_qp(&s, FlaschkaVariant::AB).unwrap();
        assert_eq!(f.first, vec![0.5]);
        assert_eq!(f.second, vec![-1.5, 0.5]);
    }

    #[test]
    fn periodic_chain_has_n_bonds() {
        let s = TodaState::new(vec![0.0, 1.0, 2.0], vec![0.0; 3], Boundary::Periodic).unwrap();
        let f = flaschka_from_qp(&s, FlaschkaVariant::AlphaBeta).unwrap();
        assert_eq!(f.first.len(), 3);
        assert_relative_eq!(f.first[2], math::exp(2.0), epsilon = 1e-12);
    }

    #[test]
    fn toda_state_rejects_bad_shapes() {
        assert!(TodaState::new(vec![0.0; 3], vec![0.0; 2], Boundary::Open).is_err());
        assert!(TodaState::new(vec![0.0], vec![0.0], Boundary::Open).is_err());
    }

    #[test]
    fn tau_to_position() {
        assert_eq!(qn_from_tau(1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(qn_from_tau(core::f64::consts::E, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(qn_from_tau(2.0, 4.0).unwrap(), -core::f64::consts::LN_2, epsilon = 1e-12);
        assert!(matches!(qn_from_tau(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(qn_from_tau(1.0, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn squaring_map() {
        let c = cdw_from_n3(&N3State::new([0.0; 3], [1.0, 1.0], 0.0));
        assert_eq!((c.c, c.d2, c.d3, c.w), ([0.0; 3], 1.0, 1.0, 0.0));
        let c = cdw_from_n3(&N3State::new([1.0, 2.0, 3.0], [0.0, 0.0], 2.0));
        assert_eq!((c.c, c.d2, c.d3, c.w), ([1.0, 2.0, 3.0], 0.0, 0.0, 4.0));
        let c = cdw_from_n3(&N3State::default());
        assert_eq!((c.c, c.d2, c.d3, c.w), ([0.0; 3], 0.0, 0.0, 0.0));
    }

    #[test]
    fn squaring_map_keeps_branch() {
        let s = N3State::new([0.1, 0.2, 0.3], [1.5, -0.5], 0.7);
        let c = cdw_from_n3(&s);
        assert_eq!(c.branch, -1.0);
        let back = c.to_n3().unwrap();
        // signs of individual entries are not recoverable, the product is
        assert_relative_eq!(back.u * back.a[0] * back.a[1], s.u * s.a[0] * s.a[1], epsilon = 1e-15);
    }

    #[test]
    fn symmetric_embedding() {
        let g = gtl_from_n3(&N3State::default());
        assert_eq!(g, GtlState::zeros(1));
        let g = gtl_from_n3(&N3State::new([1.0, 2.0, 3.0], [1.0, 1.0], 0.0));
        assert!(g.is_classic());
        let g = gtl_from_n3(&N3State::new([0.0; 3], [1.0, 2.0], 3.0));
        assert_eq!(g.b, vec![1.0, 2.0]);
        assert_eq!(g.v, 3.0);
        assert!(!g.is_classic());
    }

    #[test]
    fn gtl_site_indexing() {
        let g = GtlState::new(2, vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![6.0, 7.0, 8.0, 9.0], vec![0.0; 4], 0.0, 0.0).unwrap();
        assert_eq!(g.p_at(-2), 1.0);
        assert_eq!(g.p_at(2), 5.0);
        assert_eq!(g.p_at(3), 0.0);
        assert_eq!(g.a_at(-2), 6.0);
        assert_eq!(g.a_at(1), 9.0);
        assert_eq!(g.a_at(2), 0.0);
        assert!(GtlState::new(2, vec![0.0; 4], vec![0.0; 4], vec![0.0; 4], 0.0, 0.0).is_err());
    }

    #[test]
    fn state_vector_round_trip() {
        let s = State::Gtl(GtlState::new(1, vec![1.0, 2.0, 3.0], vec![4.0, 5.0], vec![6.0, 7.0], 8.0, 9.0).unwrap());
        let y = s.to_vec();
        assert_eq!(y.len(), s.field_names().len());
        assert_eq!(s.with_values(&y).unwrap(), s);
        assert_eq!(s.field_names()[0], "p_-1");
    }

    #[test]
    fn q_coordinates_map_to_symmetric_state() {
        let s = N3QState {
            q: [0.3, 0.1, -0.2],
            p: [1.0, 2.0, 3.0],
            p4: 0.5,
            q4: -0.4,
            u0: 2.0,
            alpha: 0.0,
        };
        let n3 = s.to_n3();
        assert_relative_eq!(n3.a[0], math::exp(0.2) * 0.5, epsilon = 1e-15);
        assert_relative_eq!(n3.a[1], math::exp(0.3) * -0.4, epsilon = 1e-15);
        assert_relative_eq!(n3.u, 2.0 * math::exp(0.5), epsilon = 1e-15);
    }
}
