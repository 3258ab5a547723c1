use gtl_core::bilinear::{
    eps_slope, exact_seed, nls_bilinear_residual, nlse_residual, series_solve_with, sinh_form_residual,
    toda_bilinear_residual, BilinearVariant, GridFn2, SeriesFn, SolveOptions, SquaredForm, TimeAxis,
};
use gtl_core::dynamics::{
    integrate, reduction_check, rhs, rhs_from_lax, FlowId, IntegratorConfig, Monitors, RhsOptions,
};
use gtl_core::lax::{r_matrix_residual, LaxRep, RForm};
use gtl_core::model::{CdwState, GtlState, N3State};
use gtl_core::poisson::{
    ham_flow_residual, involution_matrix, jacobi_residual, resolve_bracket, table_for, BracketTable, Poly,
    Gradients, GTL_KAPPA, N3_KAPPA, PRINTED_N3_KAPPA,
};
use gtl_core::State;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::Check;

pub const DEFAULT_SEED: u64 = 20_240_917;

/// A named group of checks selectable with `--check`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Reduction,
    Isospectral,
    Bracket,
    Involution,
    Bilinear,
    Series,
    Nls,
    Convergence,
    RMatrix,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Oracle,
        Suite::Reduction,
        Suite::Isospectral,
        Suite::Bracket,
        Suite::Involution,
        Suite::Bilinear,
        Suite::Series,
        Suite::Nls,
        Suite::Convergence,
        Suite::RMatrix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Reduction => "reduction",
            Suite::Isospectral => "isospectral",
            Suite::Bracket => "bracket",
            Suite::Involution => "involution",
            Suite::Bilinear => "bilinear",
            Suite::Series => "series",
            Suite::Nls => "nls",
            Suite::Convergence => "convergence",
            Suite::RMatrix => "rmatrix",
        }
    }

    /// Parses a suite name or one of the group aliases `lax`, `poisson`, `tau`.
    pub fn parse_list(s: &str) -> Option<Vec<Suite>> {
        match s {
            "lax" => Some(vec![Suite::Oracle, Suite::Reduction, Suite::Isospectral, Suite::Convergence]),
            "poisson" => Some(vec![Suite::Bracket, Suite::Involution]),
            "tau" => Some(vec![Suite::Bilinear, Suite::Series, Suite::Nls]),
            "all" => Some(Suite::ALL.to_vec()),
            _ => Suite::ALL.iter().copied().find(|x| x.name() == s).map(|x| vec![x]),
        }
    }

    pub fn run(self, seed: u64) -> Vec<Check> {
        match self {
            Suite::Oracle => oracle_equivalence(seed),
            Suite::Reduction => reduction(seed),
            Suite::Isospectral => isospectrality(),
            Suite::Bracket => bracket_resolution(seed),
            Suite::Involution => involution(seed),
            Suite::Bilinear => bilinear_identities(seed),
            Suite::Series => series_solver(),
            Suite::Nls => nls_link(),
            Suite::Convergence => convergence_order(),
            Suite::RMatrix => rmatrix_diagnostic(),
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Three-site state with fields in `[-2, 2]` and `|u| >= 0.1`.
pub fn random_n3(r: &mut impl Rng) -> N3State {
    let mut f = || r.gen_range(-2.0..=2.0);
    let p = [f(), f(), f()];
    let a = [f(), f()];
    let mag = r.gen_range(0.1..=2.0);
    let u = if r.gen_bool(0.5) { mag } else { -mag };
    N3State::new(p, a, u)
}

/// `N = 2` banded state with `u = v = 0`.
pub fn random_classic_gtl(r: &mut impl Rng) -> GtlState {
    let mut f = |len: usize| (0..len).map(|_| r.gen_range(-2.0..=2.0)).collect::<Vec<_>>();
    let (p, a, b) = (f(5), f(4), f(4));
    GtlState::new(2, p, a, b, 0.0, 0.0).expect("valid shape")
}

fn max_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

fn guard(name: &str, f: impl FnOnce() -> gtl_core::Result<Vec<Check>>) -> Vec<Check> {
    f().unwrap_or_else(|e| vec![Check::error(name, e)])
}

pub fn oracle_equivalence(seed: u64) -> Vec<Check> {
    guard("oracle.n3_rhs_vs_lax", || {
        let mut r = rng(seed, 1);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let s = State::N3(random_n3(&mut r));
            let direct = rhs(&s, FlowId::N3)?.to_vec();
            let lax = rhs_from_lax(&s, LaxRep::N3Sym)?.to_vec();
            worst = worst.max(max_diff(&direct, &lax));
        }
        Ok(vec![Check::at_most("oracle.n3_rhs_vs_lax", worst, 1e-12)])
    })
}

pub fn reduction(seed: u64) -> Vec<Check> {
    guard("reduction.classic_chain", || {
        let mut r = rng(seed, 2);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            worst = worst.max(reduction_check(&random_classic_gtl(&mut r))?);
        }
        Ok(vec![Check::at_most("reduction.classic_chain", worst, 1e-13)])
    })
}

/// Fixture of the isospectrality run.
pub fn isospectral_fixture() -> N3State {
    N3State::new([0.0; 3], [1.0, 1.0], 0.5)
}

pub fn isospectrality() -> Vec<Check> {
    guard("isospectral.run", || {
        let s = State::N3(isospectral_fixture());
        let cfg = IntegratorConfig::rk45(1e-10, 1e-10, 10.0);
        let tr = integrate(&s, FlowId::N3, &RhsOptions::default(), &cfg, Monitors::default())?;
        let mut out = Vec::new();
        let lam = tr.eigenvalue_names().iter().map(|n| tr.drift(n).unwrap_or(f64::NAN)).fold(0.0, f64::max);
        out.push(Check::at_most("isospectral.eigenvalue_drift", lam, 1e-6));
        for h in ["H1", "H2", "H3"] {
            out.push(Check::at_most(format!("isospectral.{h}_drift"), tr.drift(h).unwrap_or(f64::NAN), 1e-7));
        }
        for c in ["C2", "C3"] {
            out.push(Check::at_most(format!("isospectral.{c}_drift"), tr.drift(c).unwrap_or(f64::NAN), 1e-6));
        }
        let well = conditioned_drift(&tr, "C2", C2_CONDITIONING_FLOOR);
        out.push(Check::measured("isospectral.C2_drift_while_u_above_1e-3", well));
        Ok(out)
    })
}

/// `|u|` below which `C2 = a1 a2 / u - p2` loses absolute accuracy under an
/// absolute tolerance of `1e-10`.
pub const C2_CONDITIONING_FLOOR: f64 = 1e-3;

/// Drift of a monitor over the initial stretch where `|u| >= floor`.
fn conditioned_drift(tr: &gtl_core::dynamics::Trajectory, name: &str, floor: f64) -> f64 {
    let Some(v) = tr.series(name) else { return f64::NAN };
    let mut worst = 0.0f64;
    for (x, st) in v.iter().zip(&tr.states) {
        match st {
            State::N3(n) if n.u.abs() >= floor => worst = worst.max((x - v[0]).abs()),
            _ => break,
        }
    }
    worst
}

/// State with `u a2 >= 1` on which the printed coupling coefficient fails.
pub fn bracket_fixture() -> N3State {
    N3State::new([0.2, -0.1, 0.4], [0.7, 1.5], 1.0)
}

pub fn bracket_resolution(seed: u64) -> Vec<Check> {
    guard("bracket.resolved", || {
        let mut r = rng(seed, 4);
        let states: Vec<State> = (0..100).map(|_| State::N3(random_n3(&mut r))).collect();
        let mut worst = 0.0f64;
        for s in &states {
            worst = worst.max(ham_flow_residual(s, N3_KAPPA)?);
        }
        let fit = resolve_bracket(&states)?;
        let printed = ham_flow_residual(&State::N3(bracket_fixture()), PRINTED_N3_KAPPA)?;
        let gtl_states: Vec<State> = (0..20)
            .map(|_| {
                let mut g = random_classic_gtl(&mut r);
                g.u = r.gen_range(-1.0..=1.0);
                g.v = r.gen_range(-1.0..=1.0);
                State::Gtl(g)
            })
            .collect();
        let mut gtl_worst = 0.0f64;
        for s in &gtl_states {
            gtl_worst = gtl_worst.max(ham_flow_residual(s, GTL_KAPPA)?);
        }
        Ok(vec![
            Check::at_most("bracket.resolved_kappa_residual", worst, 1e-12),
            Check::at_most("bracket.fitted_kappa_matches", (fit.kappa - N3_KAPPA).abs(), 1e-9)
                .with_detail(format!("kappa = {:.12}, sign = {}", fit.kappa, fit.sign)),
            Check::at_least("bracket.printed_kappa_residual", printed, 0.1),
            Check::at_most("bracket.banded_table_residual", gtl_worst, 1e-12),
        ])
    })
}

pub fn involution(seed: u64) -> Vec<Check> {
    guard("involution", || {
        let mut r = rng(seed, 5);
        let table = BracketTable::n3(N3_KAPPA);
        let (mut inv, mut jac, mut quad) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..20 {
            let s = State::N3(random_n3(&mut r));
            inv = inv.max(involution_matrix(&table, &s, 4, Gradients::Analytic)?.max_abs());
            let t = table_for(&s, N3_KAPPA)?;
            let x = s.to_vec();
            for i in 0..6 {
                for j in i + 1..6 {
                    for k in j + 1..6 {
                        jac = jac.max(jacobi_residual(&t, &coord(i), &coord(j), &coord(k), &x)?);
                    }
                }
            }
            let (f, g, h) = (random_quadratic(&mut r), random_quadratic(&mut r), random_quadratic(&mut r));
            quad = quad.max(jacobi_residual(&t, &f, &g, &h, &x)?);
        }
        Ok(vec![
            Check::at_most("involution.trace_invariants", inv, 1e-9),
            Check::at_most("involution.jacobi_identity", jac, 1e-8),
            Check::measured("involution.jacobi_quadratic_observables", quad),
        ])
    })
}

fn coord(i: usize) -> Poly {
    Poly::coordinate(6, i)
}

/// Random polynomial of degree two in the six three-site coordinates.
pub fn random_quadratic(r: &mut impl Rng) -> Poly {
    let mut acc = Poly::constant(6, r.gen_range(-1.0..=1.0));
    for i in 0..6 {
        acc = acc.add(&coord(i).scale(r.gen_range(-1.0..=1.0)));
        for j in i..6 {
            acc = acc.add(&coord(i).mul(&coord(j)).scale(r.gen_range(-1.0..=1.0)));
        }
    }
    acc
}

fn random_series(r: &mut impl Rng, order: usize) -> SeriesFn {
    let c: Vec<f64> = (0..=order).map(|_| r.gen_range(-1.0..=1.0)).collect();
    SeriesFn::new(0.0, c).expect("finite coefficients")
}

pub fn bilinear_identities(seed: u64) -> Vec<Check> {
    guard("bilinear", || {
        let k = 12;
        let g = SeriesFn::poly(0.0, &[0.0, 0.0, 0.5], k).exp();
        let printed = toda_bilinear_residual(&g, &g, &g, BilinearVariant::Printed)?.max_abs();
        let one = SeriesFn::constant(0.0, 1.0, k);
        let vacuum = toda_bilinear_residual(&one, &one, &one, BilinearVariant::Standard)?.max_abs();
        let mut r = rng(seed, 6);
        let mut sinh = 0.0f64;
        for _ in 0..20 {
            let (a, b, c) = (random_series(&mut r, k), random_series(&mut r, k), random_series(&mut r, k));
            let lhs = sinh_form_residual(&a, &b, &c)?;
            let rhs = toda_bilinear_residual(&a, &b, &c, BilinearVariant::Standard)?.scale(2.0);
            sinh = sinh.max((&lhs - &rhs).max_abs());
        }
        Ok(vec![
            Check::at_most("bilinear.gaussian_solves_printed_form", printed, 1e-12),
            Check::at_most("bilinear.vacuum_solves_standard_form", vacuum, 0.0),
            Check::at_most("bilinear.sinh_form_is_twice_standard", sinh, 1e-12),
        ])
    })
}

/// Initial data of the exact seed of the epsilon solver.
pub fn series_fixture() -> CdwState {
    CdwState { c: [0.3, -0.1, 0.5], d2: 0.8, d3: 1.2, w: 0.6, branch: 1.0 }
}

/// Order-one direction used for the perturbed run.
pub fn series_perturbation(order: usize) -> [SeriesFn; 3] {
    [
        SeriesFn::poly(0.0, &[0.4, 0.3, -0.2], order),
        SeriesFn::poly(0.0, &[-0.3, 0.1, 0.25], order),
        SeriesFn::poly(0.0, &[0.2, -0.5, 0.1], order),
    ]
}

pub const SERIES_EPS: [f64; 3] = [1e-1, 1e-2, 1e-3];

pub fn series_solver() -> Vec<Check> {
    guard("series", || {
        let form = SquaredForm::Printed;
        let order = 12;
        let seed = exact_seed(&series_fixture(), form, order)?;
        let plain = series_solve_with(&seed, 3, &SolveOptions { form, ..Default::default() })?;
        let corr = plain.correction_sizes.iter().fold(0.0f64, |m, c| m.max(*c));
        let opts = SolveOptions { form, perturbation: Some(series_perturbation(order)), ..Default::default() };
        let pert = series_solve_with(&seed, 3, &opts)?;
        let slope = eps_slope(&pert.family, &SERIES_EPS, form)?;
        let norms: Vec<String> = SERIES_EPS
            .iter()
            .map(|e| pert.family.residual_norm(*e, form).map(|v| format!("{e:e}: {v:.3e}")))
            .collect::<gtl_core::Result<_>>()?;
        Ok(vec![
            Check::at_most("series.exact_seed_corrections", corr, 1e-10),
            Check::at_least("series.eps_slope", slope, 3.8).with_detail(norms.join(", ")),
        ])
    })
}

fn grid(h: f64, n: usize, axis: TimeAxis, f: impl Fn(f64, f64) -> Complex64) -> gtl_core::Result<GridFn2> {
    GridFn2::from_fn(n, n, (h, h), (0.0, 0.0), axis, f)
}

fn cis(x: f64) -> Complex64 {
    Complex64::new(0.0, x).exp()
}

/// `max |nlse_residual|` of `exp(i(3 t1 - 7 s))` at spacing `h`.
pub fn nls_wave_residual(h: f64) -> gtl_core::Result<f64> {
    let phi = grid(h, 9, TimeAxis::Real, |t1, s| cis(3.0 * t1 - 7.0 * s))?;
    let bar = grid(h, 9, TimeAxis::Real, |t1, s| cis(-(3.0 * t1 - 7.0 * s)))?;
    Ok(nlse_residual(&phi, &bar)?.max_abs())
}

pub fn nls_link() -> Vec<Check> {
    guard("nls", || {
        let h = 0.01;
        let phi = grid(h, 21, TimeAxis::Real, |_, s| cis(2.0 * s))?;
        let bar = grid(h, 21, TimeAxis::Real, |_, s| cis(-2.0 * s))?;
        let plane = nlse_residual(&phi, &bar)?.max_abs();
        let coarse = nls_wave_residual(0.02)?;
        let fine = nls_wave_residual(0.01)?;
        // tau_n = exp(n (i k t1 + i w s) + t1^2 / 2) on the imaginary time axis
        let (kappa, omega) = (0.7, 2.0 - 0.49);
        let tau = |n: f64| {
            move |t1: f64, s: f64| (Complex64::new(0.5 * t1 * t1, n * (kappa * t1 + omega * s))).exp()
        };
        let mk = |n: f64| grid(h, 21, TimeAxis::Imaginary, tau(n));
        let (tm, t0, tp) = (mk(-1.0)?, mk(0.0)?, mk(1.0)?);
        let (r1, r2) = nls_bilinear_residual(&tm, &t0, &tp)?;
        let phi = GridFn2 { data: tp.data.iter().zip(&t0.data).map(|(a, b)| a / b).collect(), ..tp.clone() };
        let bar = GridFn2 { data: tm.data.iter().zip(&t0.data).map(|(a, b)| a / b).collect(), ..tm.clone() };
        let link = nlse_residual(&phi, &bar)?.max_abs();
        let scale = t0.max_abs().powi(2);
        Ok(vec![
            Check::at_most("nls.plane_wave_residual", plane, 1e-6),
            Check::at_least("nls.stencil_halving_ratio", coarse / fine, 8.0)
                .with_detail(format!("h=0.02: {coarse:.3e}, h=0.01: {fine:.3e}")),
            Check::at_most("nls.bilinear_pair_residual", r1.max_abs().max(r2.max_abs()) / scale, 1e-6),
            Check::at_most("nls.bilinear_to_nlse_link", link, 1e-6),
        ])
    })
}

/// Fixture of the step-halving run.
pub fn convergence_fixture() -> N3State {
    N3State::new([0.5, -0.3, 0.2], [1.2, 0.8], 0.6)
}

/// Global errors of fixed-step RK4 at `dt = 1e-2` and `5e-3` against a
/// tight adaptive reference at `T = 1`.
pub fn rk4_errors() -> gtl_core::Result<(f64, f64)> {
    let s = State::N3(convergence_fixture());
    let run = |cfg: IntegratorConfig| integrate(&s, FlowId::N3, &RhsOptions::default(), &cfg, Monitors::NONE);
    let reference = run(IntegratorConfig::rk45(1e-13, 1e-13, 1.0))?.last().to_vec();
    let e1 = max_diff(&run(IntegratorConfig::rk4_fixed(1e-2, 1.0))?.last().to_vec(), &reference);
    let e2 = max_diff(&run(IntegratorConfig::rk4_fixed(5e-3, 1.0))?.last().to_vec(), &reference);
    Ok((e1, e2))
}

pub fn convergence_order() -> Vec<Check> {
    guard("convergence.rk4_ratio", || {
        let (e1, e2) = rk4_errors()?;
        let ratio = e1 / e2;
        Ok(vec![Check::within("convergence.rk4_ratio", ratio, 14.0, 18.0)
            .with_detail(format!("errors {e1:.3e} -> {e2:.3e}"))])
    })
}

/// Classic-chain banded states on which the r-matrix identity is evaluated.
pub fn rmatrix_fixtures() -> Vec<GtlState> {
    vec![
        GtlState::new(1, vec![0.0; 3], vec![1.0; 2], vec![1.0; 2], 0.0, 0.0).expect("valid"),
        GtlState::new(1, vec![0.3, -0.2, 0.5], vec![0.8, 1.1], vec![0.8, 1.1], 0.0, 0.0).expect("valid"),
        GtlState::new(2, vec![0.1, 0.4, -0.3, 0.2, -0.5], vec![1.0, 0.6, 0.9, 1.3], vec![1.0, 0.6, 0.9, 1.3], 0.0, 0.0)
            .expect("valid"),
    ]
}

pub fn rmatrix_diagnostic() -> Vec<Check> {
    rmatrix_fixtures()
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let name = format!("rmatrix.residual_fixture{}", i + 1);
            let run = || -> gtl_core::Result<Vec<Check>> {
                let table = BracketTable::gtl(s.n, GTL_KAPPA)?;
                let mut out = Vec::new();
                for (form, tag) in [(RForm::Transposed, "transposed"), (RForm::Symmetric, "symmetric")] {
                    let r = r_matrix_residual(s, &table, form)?;
                    out.push(Check::measured(format!("{name}_{tag}"), r.residual).with_detail(format!(
                        "bracket max {:.6e}, rhs max {:.6e}",
                        r.bracket_max, r.rhs_max
                    )));
                }
                Ok(out)
            };
            run().unwrap_or_else(|e| vec![Check::error(name, e)])
        })
        .collect()
}

/// Runs the selected suites in order.
pub fn run_suites(suites: &[Suite], seed: u64) -> Vec<Check> {
    suites.iter().flat_map(|s| s.run(seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_aliases() {
        assert_eq!(Suite::parse_list("rmatrix"), Some(vec![Suite::RMatrix]));
        assert_eq!(Suite::parse_list("poisson").unwrap().len(), 2);
        assert!(Suite::parse_list("nope").is_none());
    }

    #[test]
    fn random_n3_respects_bounds() {
        let mut r = rng(1, 0);
        for _ in 0..200 {
            let s = random_n3(&mut r);
            assert!(s.u.abs() >= 0.1 && s.u.abs() <= 2.0);
            assert!(s.p.iter().chain(&s.a).all(|x| x.abs() <= 2.0));
        }
    }
}
