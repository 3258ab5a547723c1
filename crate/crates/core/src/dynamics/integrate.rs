use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lax::{build_lax, spectrum, LaxInput, LaxRep};
use crate::matrix::Mat;
use crate::model::{flaschka_from_qp, FlaschkaState, FlaschkaVariant, RepParams, State};
use crate::poisson::invariants;

use super::{rhs_with, FlowId, RhsOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Rk4Fixed { dt: f64 },
    /// Dormand-Prince 5(4) with error per component scaled by
    /// `atol + rtol * max(|y|, |y_new|)`.
    Rk45 { atol: f64, rtol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    pub max_steps: usize,
}

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;
const TOL_RANGE: (f64, f64) = (1e-14, 1e-2);

impl IntegratorConfig {
    pub fn rk4_fixed(dt: f64, t_end: f64) -> Self {
        Self { method: Method::Rk4Fixed { dt }, t_end, max_steps: DEFAULT_MAX_STEPS }
    }

    pub fn rk45(atol: f64, rtol: f64, t_end: f64) -> Self {
        Self { method: Method::Rk45 { atol, rtol }, t_end, max_steps: DEFAULT_MAX_STEPS }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidConfig(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        match self.method {
            Method::Rk4Fixed { dt } => {
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
                }
            }
            Method::Rk45 { atol, rtol } => {
                for (name, v) in [("atol", atol), ("rtol", rtol)] {
                    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&v) {
                        return Err(Error::InvalidConfig(format!(
                            "{name} must lie in [{:e}, {:e}], got {v:e}",
                            TOL_RANGE.0, TOL_RANGE.1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejections: usize,
    pub rhs_evals: usize,
}

/// Which per-sample diagnostics to record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Monitors {
    /// `H1..H3`, `C1..C3` (missing values are NaN).
    pub invariants: bool,
    /// Real parts of the sorted eigenvalues of the state's Lax matrix.
    pub spectrum: bool,
}

impl Default for Monitors {
    fn default() -> Self {
        Self { invariants: true, spectrum: true }
    }
}

impl Monitors {
    pub const NONE: Monitors = Monitors { invariants: false, spectrum: false };
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub flow: FlowId,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Named monitor series, one value per sample.
    pub series: Vec<(String, Vec<f64>)>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// `max_t |x(t) - x(0)|` of a monitor; NaN if any sample is NaN.
    pub fn drift(&self, name: &str) -> Option<f64> {
        self.series(name).map(drift_of)
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// Names of the eigenvalue monitors.
    pub fn eigenvalue_names(&self) -> Vec<&str> {
        self.series.iter().map(|(n, _)| n.as_str()).filter(|n| n.starts_with("lam")).collect()
    }
}

fn drift_of(v: &[f64]) -> f64 {
    let x0 = v[0];
    v.iter().fold(0.0, |m: f64, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max((x - x0).abs()) })
}

/// Symmetric tridiagonal Lax matrix of the classic chain in `(a, b)` form.
fn classic_matrix(f: &FlaschkaState) -> Option<Mat> {
    let n = f.second.len();
    if f.first.len() + 1 != n {
        return None;
    }
    let (diag, off): (Vec<f64>, Vec<f64>) = match f.variant {
        FlaschkaVariant::AB => (f.second.clone(), f.first.clone()),
        FlaschkaVariant::AlphaBeta => {
            if f.first.iter().any(|a| *a < 0.0) {
                return None;
            }
            (f.second.clone(), f.first.iter().map(|a| crate::math::sqrt(*a)).collect())
        }
    };
    Some(Mat::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    }))
}

/// Matrix whose spectrum the monitors track: the symmetric three-site matrix
/// (squared and q-coordinate states are mapped onto it), the banded matrix,
/// or the symmetric tridiagonal matrix of the classic chain.
pub fn lax_matrix(state: &State) -> Option<Mat> {
    let params = RepParams::default();
    match state {
        State::N3(s) => build_lax(LaxInput::N3(s), LaxRep::N3Sym, &params).ok().map(|p| p.l),
        State::N3Q(s) => build_lax(LaxInput::N3(&s.to_n3()), LaxRep::N3Sym, &params).ok().map(|p| p.l),
        State::Cdw(s) => {
            let n3 = s.to_n3().ok()?;
            build_lax(LaxInput::N3(&n3), LaxRep::N3Sym, &params).ok().map(|p| p.l)
        }
        State::Gtl(s) => build_lax(LaxInput::Gtl(s), LaxRep::GtlBanded, &params).ok().map(|p| p.l),
        State::Toda(s) => classic_matrix(&flaschka_from_qp(s, FlaschkaVariant::AB).ok()?),
        State::Flaschka(f) => classic_matrix(f),
    }
}

fn matrix_dim(state: &State) -> usize {
    match state {
        State::N3(_) | State::N3Q(_) | State::Cdw(_) => 3,
        State::Gtl(s) => s.dim(),
        State::Toda(s) => s.q.len(),
        State::Flaschka(f) => f.second.len(),
    }
}

fn trace_powers(l: &Mat) -> [f64; 3] {
    let l2 = l.matmul(l).expect("square");
    let l3 = l2.matmul(l).expect("square");
    [l.trace(), l2.trace() / 2.0, l3.trace() / 3.0]
}

/// Monitor values at one state: `H1..H3`, `C1..C3`, then `lam1..lamD`.
/// Squared-variable states are read through the symmetric matrix.
pub fn standard_monitors(state: &State, monitors: Monitors) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    if monitors.invariants {
        let (h, c) = match state {
            State::N3(_) | State::N3Q(_) | State::Gtl(_) => match invariants(state, 3) {
                Ok(inv) => ([inv.h[0], inv.h[1], inv.h[2]], inv.casimirs().map(|c| c.unwrap_or(f64::NAN))),
                Err(_) => ([f64::NAN; 3], [f64::NAN; 3]),
            },
            State::Cdw(s) => match s.to_n3() {
                Ok(n3) => match invariants(&State::N3(n3), 3) {
                    Ok(inv) => ([inv.h[0], inv.h[1], inv.h[2]], inv.casimirs().map(|c| c.unwrap_or(f64::NAN))),
                    Err(_) => ([f64::NAN; 3], [f64::NAN; 3]),
                },
                Err(_) => ([f64::NAN; 3], [f64::NAN; 3]),
            },
            _ => match lax_matrix(state) {
                Some(l) => {
                    let h = trace_powers(&l);
                    (h, [h[0], f64::NAN, f64::NAN])
                }
                None => ([f64::NAN; 3], [f64::NAN; 3]),
            },
        };
        for (i, v) in h.iter().enumerate() {
            out.push((format!("H{}", i + 1), *v));
        }
        for (i, v) in c.iter().enumerate() {
            out.push((format!("C{}", i + 1), *v));
        }
    }
    if monitors.spectrum {
        let d = matrix_dim(state);
        let eig = lax_matrix(state).and_then(|l| spectrum(&l).ok()).map(|s| s.real_parts());
        for i in 0..d {
            let v = eig.as_ref().map_or(f64::NAN, |e| e[i]);
            out.push((format!("lam{}", i + 1), v));
        }
    }
    out
}

struct System<'a> {
    proto: &'a State,
    flow: FlowId,
    opts: &'a RhsOptions,
    evals: usize,
}

impl System<'_> {
    fn eval(&mut self, y: &[f64]) -> Result<Vec<f64>> {
        self.evals += 1;
        let s = self.proto.with_values(y)?;
        Ok(rhs_with(&s, self.flow, self.opts)?.to_vec())
    }
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        let s = h * c;
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += s * ki;
        }
    }
    out
}

fn all_finite(y: &[f64]) -> bool {
    y.iter().all(|x| x.is_finite())
}

struct Recorder {
    monitors: Monitors,
    times: Vec<f64>,
    states: Vec<State>,
    names: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl Recorder {
    fn new(monitors: Monitors, t0: f64, s0: State) -> Self {
        let m = standard_monitors(&s0, monitors);
        let names = m.iter().map(|(n, _)| n.clone()).collect();
        let values = m.iter().map(|(_, v)| vec![*v]).collect();
        Self { monitors, times: vec![t0], states: vec![s0], names, values }
    }

    fn push(&mut self, t: f64, s: State) {
        for (col, (_, v)) in self.values.iter_mut().zip(standard_monitors(&s, self.monitors)) {
            col.push(v);
        }
        self.times.push(t);
        self.states.push(s);
    }

    fn finish(self, flow: FlowId, stats: IntegratorStats) -> Trajectory {
        Trajectory {
            flow,
            times: self.times,
            states: self.states,
            series: self.names.into_iter().zip(self.values).collect(),
            stats,
        }
    }
}

/// Integrates `flow` from `state0` over `[0, t_end]`, recording every
/// accepted step.
pub fn integrate(
    state0: &State,
    flow: FlowId,
    opts: &RhsOptions,
    cfg: &IntegratorConfig,
    monitors: Monitors,
) -> Result<Trajectory> {
    cfg.validate()?;
    state0.validate()?;
    let mut sys = System { proto: state0, flow, opts, evals: 0 };
    // surface kind mismatches before stepping
    let mut y = state0.to_vec();
    let mut f = sys.eval(&y)?;
    let mut rec = Recorder::new(monitors, 0.0, state0.clone());
    let mut stats = IntegratorStats::default();
    let mut t = 0.0;
    if cfg.t_end == 0.0 {
        stats.rhs_evals = sys.evals;
        return Ok(rec.finish(flow, stats));
    }
    match cfg.method {
        Method::Rk4Fixed { dt } => {
            let n = libm::ceil(cfg.t_end / dt - 1e-9).max(1.0) as usize;
            if n > cfg.max_steps {
                return Err(Error::MaxSteps { max_steps: cfg.max_steps, t });
            }
            for i in 0..n {
                let h = if i + 1 == n { cfg.t_end - t } else { dt };
                let k1 = if i == 0 { core::mem::take(&mut f) } else { sys.eval(&y)? };
                let k2 = sys.eval(&axpy(&y, h, &[(0.5, &k1)]))?;
                let k3 = sys.eval(&axpy(&y, h, &[(0.5, &k2)]))?;
                let k4 = sys.eval(&axpy(&y, h, &[(1.0, &k3)]))?;
                let yn = axpy(&y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
                if !all_finite(&yn) {
                    return Err(Error::NonFinite { last_good_t: t });
                }
                y = yn;
                t = if i + 1 == n { cfg.t_end } else { t + h };
                stats.steps += 1;
                rec.push(t, state0.with_values(&y)?);
            }
        }
        Method::Rk45 { atol, rtol } => {
            let mut h = initial_step(&y, &f, atol, rtol, cfg.t_end);
            while t < cfg.t_end {
                if stats.steps + stats.rejections >= cfg.max_steps {
                    return Err(Error::MaxSteps { max_steps: cfg.max_steps, t });
                }
                let last = t + h >= cfg.t_end;
                if last {
                    h = cfg.t_end - t;
                }
                let (yn, fn_, err) = dopri_step(&mut sys, &y, &f, h, atol, rtol)?;
                if !err.is_finite() || !all_finite(&yn) {
                    if h < 1e-14 * cfg.t_end.max(1.0) {
                        return Err(Error::NonFinite { last_good_t: t });
                    }
                    stats.rejections += 1;
                    h *= 0.2;
                    continue;
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
                if err <= 1.0 {
                    t = if last { cfg.t_end } else { t + h };
                    y = yn;
                    f = fn_;
                    stats.steps += 1;
                    rec.push(t, state0.with_values(&y)?);
                    h *= factor;
                } else {
                    stats.rejections += 1;
                    h *= factor.min(1.0);
                }
                if h < 1e-14 * cfg.t_end.max(1.0) && t < cfg.t_end {
                    return Err(Error::NonConvergence { iterations: stats.steps + stats.rejections });
                }
            }
        }
    }
    stats.rhs_evals = sys.evals;
    Ok(rec.finish(flow, stats))
}

fn err_norm(e: &[f64], y0: &[f64], y1: &[f64], atol: f64, rtol: f64) -> f64 {
    e.iter()
        .zip(y0.iter().zip(y1))
        .fold(0.0, |m: f64, (ei, (a, b))| m.max(ei.abs() / (atol + rtol * a.abs().max(b.abs()))))
}

fn initial_step(y: &[f64], f: &[f64], atol: f64, rtol: f64, t_end: f64) -> f64 {
    let d0 = err_norm(y, y, y, atol, rtol);
    let d1 = err_norm(f, y, y, atol, rtol);
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(t_end).max(1e-12)
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand-Prince step; returns the new state, its derivative (first
/// stage of the next step) and the scaled error norm.
fn dopri_step(
    sys: &mut System<'_>,
    y: &[f64],
    k1: &[f64],
    h: f64,
    atol: f64,
    rtol: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let stage = |sys: &mut System<'_>, y: Vec<f64>| -> Result<Option<Vec<f64>>> {
        if !all_finite(&y) {
            return Ok(None);
        }
        match sys.eval(&y) {
            Ok(k) if all_finite(&k) => Ok(Some(k)),
            Ok(_) | Err(Error::Domain(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let nan = || (vec![f64::NAN; y.len()], Vec::new(), f64::NAN);
    let Some(k2) = stage(sys, axpy(y, h, &[(A21, k1)]))? else { return Ok(nan()) };
    let Some(k3) = stage(sys, axpy(y, h, &[(A31, k1), (A32, &k2)]))? else { return Ok(nan()) };
    let Some(k4) = stage(sys, axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))? else { return Ok(nan()) };
    let Some(k5) = stage(sys, axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))? else {
        return Ok(nan());
    };
    let Some(k6) = stage(sys, axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))? else {
        return Ok(nan());
    };
    let yn = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let Some(k7) = stage(sys, yn.clone())? else { return Ok(nan()) };
    let e: Vec<f64> = (0..y.len())
        .map(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
        .collect();
    let err = err_norm(&e, y, &yn, atol, rtol);
    Ok((yn, k7, err))
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Method::Rk4Fixed { .. } => f.write_str("rk4_fixed"),
            Method::Rk45 { .. } => f.write_str("rk45_adaptive"),
        }
    }
}

impl Method {
    pub fn tag(&self) -> String {
        self.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::N3State;

    #[test]
    fn fixed_point_trajectory_is_constant() {
        let s = State::N3(N3State::new([0.5, -1.0, 0.2], [0.0, 0.0], 0.0));
        let tr = integrate(&s, FlowId::N3, &RhsOptions::default(), &IntegratorConfig::rk45(1e-10, 1e-10, 3.0), Monitors::default())
            .unwrap();
        assert!(tr.states.iter().all(|x| *x == s));
        assert_eq!(tr.drift("H2"), Some(0.0));
        assert_eq!(*tr.times.last().unwrap(), 3.0);
    }

    #[test]
    fn energy_conserved_on_symmetric_flow() {
        let s = State::N3(N3State::new([0.0; 3], [1.0, 1.0], 0.0));
        let tr = integrate(&s, FlowId::N3, &RhsOptions::default(), &IntegratorConfig::rk45(1e-10, 1e-10, 10.0), Monitors::default())
            .unwrap();
        assert!(tr.drift("H2").unwrap() <= 1e-8);
        for name in tr.eigenvalue_names() {
            assert!(tr.drift(name).unwrap() <= 1e-7, "{name}");
        }
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(tr.times.len(), tr.states.len());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(IntegratorConfig::rk45(1e-16, 1e-8, 1.0).validate().is_err());
        assert!(IntegratorConfig::rk45(1e-8, 0.1, 1.0).validate().is_err());
        assert!(IntegratorConfig::rk4_fixed(0.0, 1.0).validate().is_err());
        assert!(IntegratorConfig::rk4_fixed(0.1, -1.0).validate().is_err());
    }

    #[test]
    fn max_steps_reported() {
        let s = State::N3(N3State::new([0.0; 3], [1.0, 1.0], 0.0));
        let mut cfg = IntegratorConfig::rk4_fixed(1e-3, 1.0);
        cfg.max_steps = 10;
        assert!(matches!(
            integrate(&s, FlowId::N3, &RhsOptions::default(), &cfg, Monitors::NONE),
            Err(Error::MaxSteps { .. })
        ));
    }

    #[test]
    fn blow_up_reports_last_good_time() {
        let s = State::Toda(crate::model::TodaState::new(vec![0.0, -710.0], vec![0.0, 0.0], crate::model::Boundary::Open).unwrap());
        let r = integrate(&s, FlowId::TlQp, &RhsOptions::default(), &IntegratorConfig::rk4_fixed(0.1, 1.0), Monitors::NONE);
        assert!(matches!(r, Err(Error::NonFinite { last_good_t }) if last_good_t == 0.0), "{r:?}");
    }
}
