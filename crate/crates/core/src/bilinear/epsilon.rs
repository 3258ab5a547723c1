use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::series::{SeriesAlgebra, SeriesFn};
use super::tau::{residual_lines, SquaredForm, TauConstants, TauTriple};
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{lstsq_min_norm, Mat};

/// Power series in `eps` whose coefficients are t-series:
/// `sum_k eps^k terms[k]`, truncated at the last stored order.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsSeries {
    pub terms: Vec<SeriesFn>,
}

impl EpsSeries {
    pub fn eps_order(&self) -> usize {
        self.terms.len() - 1
    }

    fn zero_like(&self) -> SeriesFn {
        self.terms[0].scale(0.0)
    }

    fn len_with(&self, o: &Self) -> usize {
        self.terms.len().min(o.terms.len())
    }
}

impl SeriesAlgebra for EpsSeries {
    fn add(&self, o: &Self) -> Self {
        let n = self.len_with(o);
        Self { terms: (0..n).map(|k| &self.terms[k] + &o.terms[k]).collect() }
    }

    fn sub(&self, o: &Self) -> Self {
        let n = self.len_with(o);
        Self { terms: (0..n).map(|k| &self.terms[k] - &o.terms[k]).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.len_with(o);
        let terms = (0..n)
            .map(|k| {
                (1..=k).fold(&self.terms[0] * &o.terms[k], |acc, j| &acc + &(&self.terms[j] * &o.terms[k - j]))
            })
            .collect();
        Self { terms }
    }

    fn scale(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| t.scale(s)).collect() }
    }

    fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.terms[0] = out.terms[0].add_scalar(s);
        out
    }

    fn deriv(&self) -> Self {
        Self { terms: self.terms.iter().map(|t| t.deriv()).collect() }
    }

    fn ln(&self) -> Result<Self> {
        let a = &self.terms;
        let r0 = a[0].recip()?;
        let mut b = Vec::with_capacity(a.len());
        b.push(a[0].ln()?);
        for n in 1..a.len() {
            let mut s = a[n].clone();
            for j in 1..n {
                s = &s - &(&b[j] * &a[n - j]).scale(j as f64 / n as f64);
            }
            b.push(&s * &r0);
        }
        Ok(Self { terms: b })
    }

    fn exp(&self) -> Self {
        let b = &self.terms;
        let mut e = Vec::with_capacity(b.len());
        e.push(b[0].exp());
        for n in 1..b.len() {
            let mut s = self.zero_like();
            for j in 1..=n {
                s = &s + &(&b[j] * &e[n - j]).scale(j as f64 / n as f64);
            }
            e.push(s);
        }
        Self { terms: e }
    }

    fn recip(&self) -> Result<Self> {
        let a = &self.terms;
        let r0 = a[0].recip()?;
        let mut r = Vec::with_capacity(a.len());
        r.push(r0.clone());
        for n in 1..a.len() {
            let mut s = self.zero_like();
            for j in 1..=n {
                s = &s + &(&a[j] * &r[n - j]);
            }
            r.push(-&(&s * &r0));
        }
        Ok(Self { terms: r })
    }

    fn affine_like(&self, a: f64, b: f64) -> Self {
        let base = SeriesAlgebra::affine_like(&self.terms[0], a, b);
        let mut terms = vec![base.scale(0.0); self.terms.len()];
        terms[0] = base;
        Self { terms }
    }
}

/// `tau_n = sum_k eps^k tau_n^(k)`, `f = sum_k eps^k f^(k)`; `terms[k]` holds
/// `(tau2, tau3, f)` at order `k`, `terms[0]` the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonFamily {
    pub constants: TauConstants,
    pub terms: Vec<[SeriesFn; 3]>,
}

impl EpsilonFamily {
    pub fn from_seed(seed: &TauTriple) -> Self {
        Self {
            constants: seed.constants,
            terms: vec![[seed.tau2.clone(), seed.tau3.clone(), seed.f.clone()]],
        }
    }

    pub fn k_eps(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn seed(&self) -> TauTriple {
        let [a, b, c] = self.terms[0].clone();
        TauTriple { tau2: a, tau3: b, f: c, constants: self.constants }
    }

    /// Sum of the terms at a numeric `eps`.
    pub fn evaluate(&self, eps: f64) -> Result<TauTriple> {
        let mut acc = self.terms[0].clone();
        let mut p = 1.0;
        for t in &self.terms[1..] {
            p *= eps;
            for (a, b) in acc.iter_mut().zip(t) {
                *a = &*a + &b.scale(p);
            }
        }
        let [a, b, c] = acc;
        TauTriple::new(a, b, c, self.constants)
    }

    fn component(&self, i: usize, eps_order: usize) -> EpsSeries {
        let zero = self.terms[0][i].scale(0.0);
        EpsSeries {
            terms: (0..=eps_order).map(|k| self.terms.get(k).map_or(zero.clone(), |t| t[i].clone())).collect(),
        }
    }

    /// Residual lines as epsilon series up to `eps_order`.
    pub fn residual_series(&self, eps_order: usize, form: SquaredForm) -> Result<[EpsSeries; 3]> {
        let (a, b, c) = (self.component(0, eps_order), self.component(1, eps_order), self.component(2, eps_order));
        residual_lines(&a, &b, &c, &self.constants, form)
    }

    /// Largest residual coefficient of the summed family at `eps`.
    pub fn residual_norm(&self, eps: f64, form: SquaredForm) -> Result<f64> {
        let tt = self.evaluate(eps)?;
        let r = residual_lines(&tt.tau2, &tt.tau3, &tt.f, &tt.constants, form)?;
        Ok(r.iter().fold(0.0, |m, s| m.max(s.max_abs())))
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub form: SquaredForm,
    /// Prescribed order-1 direction; the solver adds the correction that
    /// makes the order-1 equations hold.
    pub perturbation: Option<[SeriesFn; 3]>,
    /// Largest per-coefficient order-0 residual accepted for the seed.
    pub seed_tol: f64,
    pub rank_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { form: SquaredForm::Printed, perturbation: None, seed_tol: 1e-10, rank_tol: 1e-12 }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub family: EpsilonFamily,
    pub rows: usize,
    pub unknowns: usize,
    pub rank: usize,
    /// `max |J x_k + F_k|` per order `k = 1..=K`.
    pub order_residuals: Vec<f64>,
    /// Largest correction coefficient per order.
    pub correction_sizes: Vec<f64>,
}

fn stack(lines: &[EpsSeries; 3], k: usize) -> Vec<f64> {
    lines.iter().flat_map(|l| l.terms[k].coeffs().to_vec()).collect()
}

/// Order-by-order solution of the epsilon-expanded bilinear system. At order
/// `k` the unknown t-coefficients of `(tau2, tau3, f)^(k)` enter linearly
/// through the Jacobian `J` of the residual lines at the seed; the
/// coefficient system `J x = -F_k` is solved in the minimum-norm least
/// squares sense.
pub fn series_solve(seed: &TauTriple, k_eps: usize) -> Result<EpsilonFamily> {
    Ok(series_solve_with(seed, k_eps, &SolveOptions::default())?.family)
}

pub fn series_solve_with(seed: &TauTriple, k_eps: usize, opts: &SolveOptions) -> Result<SolveReport> {
    let order = seed.order();
    let t0 = seed.t0();
    let seed_family = EpsilonFamily::from_seed(seed);
    let r0 = seed_family.residual_series(0, opts.form)?;
    let worst = r0.iter().fold(0.0f64, |m, l| m.max(l.terms[0].max_abs()));
    if worst.is_nan() || worst > opts.seed_tol {
        return Err(Error::Precondition(format!(
            "seed residual {worst:e} exceeds {:e} at order 0",
            opts.seed_tol
        )));
    }
    if let Some(p) = &opts.perturbation {
        for s in p {
            s.same_base(&seed.tau2)?;
        }
    }
    let n_unknowns = 3 * (order + 1);
    let zero = SeriesFn::zero(t0, order);
    let basis = |j: usize| -> [SeriesFn; 3] {
        let mut out = [zero.clone(), zero.clone(), zero.clone()];
        out[j / (order + 1)].set_coeff(j % (order + 1), 1.0);
        out
    };
    let mut columns = Vec::with_capacity(n_unknowns);
    for j in 0..n_unknowns {
        let fam = EpsilonFamily { constants: seed.constants, terms: vec![seed_family.terms[0].clone(), basis(j)] };
        columns.push(stack(&fam.residual_series(1, opts.form)?, 1));
    }
    let rows = columns[0].len();
    let jac = Mat::from_fn(rows, n_unknowns, |i, j| columns[j][i]);

    let mut family = seed_family;
    let mut order_residuals = Vec::with_capacity(k_eps);
    let mut correction_sizes = Vec::with_capacity(k_eps);
    let mut rank = rows.min(n_unknowns);
    for k in 1..=k_eps {
        let prescribed = match (&opts.perturbation, k) {
            (Some(p), 1) => p.clone(),
            _ => [zero.clone(), zero.clone(), zero.clone()],
        };
        let mut trial = family.clone();
        trial.terms.push(prescribed.clone());
        let f = stack(&trial.residual_series(k, opts.form)?, k);
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let sol = lstsq_min_norm(&jac, &rhs, opts.rank_tol)?;
        rank = sol.rank;
        if sol.rank < rows {
            return Err(Error::RankDeficient { order: k, rank: sol.rank, rows });
        }
        order_residuals.push(sol.residual);
        correction_sizes.push(sol.x.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        let mut next = prescribed;
        for (j, x) in sol.x.iter().enumerate() {
            let (comp, c) = (j / (order + 1), j % (order + 1));
            let v = next[comp].coeff(c) + x;
            next[comp].set_coeff(c, v);
        }
        family.terms.push(next);
    }
    Ok(SolveReport { family, rows, unknowns: n_unknowns, rank, order_residuals, correction_sizes })
}

/// Least-squares slope of `log10(residual_norm)` against `log10(eps)`.
pub fn eps_slope(family: &EpsilonFamily, eps: &[f64], form: SquaredForm) -> Result<f64> {
    if eps.len() < 2 {
        return Err(Error::Precondition("need at least two eps values".into()));
    }
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .map(|e| Ok((math::log10(*e), math::log10(family.residual_norm(*e, form)?))))
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::super::tau::{closed_form_seed, exact_seed};
    use super::*;
    use crate::model::CdwState;

    fn seed() -> TauTriple {
        exact_seed(&CdwState { c: [0.3, -0.1, 0.5], d2: 0.8, d3: 1.2, w: 0.6, branch: 1.0 }, SquaredForm::Printed, 12)
            .unwrap()
    }

    #[test]
    fn eps_algebra_matches_numeric_evaluation() {
        let a = EpsSeries {
            terms: vec![
                SeriesFn::poly(0.0, &[1.5, 0.2], 6),
                SeriesFn::poly(0.0, &[0.3, -0.4, 0.1], 6),
                SeriesFn::poly(0.0, &[-0.2, 0.0, 0.5], 6),
            ],
        };
        let l = a.ln().unwrap().exp();
        for (x, y) in l.terms.iter().zip(&a.terms) {
            assert!((x - y).max_abs() < 1e-13);
        }
        let r = a.mul(&a.recip().unwrap());
        assert!((&r.terms[0] - &SeriesFn::constant(0.0, 1.0, 6)).max_abs() < 1e-14);
        assert!(r.terms[1].max_abs() < 1e-14 && r.terms[2].max_abs() < 1e-14);
    }

    #[test]
    fn exact_seed_needs_no_correction() {
        let s = seed();
        let rep = series_solve_with(&s, 2, &SolveOptions::default()).unwrap();
        assert!(rep.correction_sizes.iter().all(|c| *c <= 1e-10), "{:?}", rep.correction_sizes);
        assert_eq!(rep.family.evaluate(0.0).unwrap(), s);
        assert_eq!(rep.rows, 31);
        assert_eq!(rep.unknowns, 39);
    }

    #[test]
    fn non_solution_seed_rejected() {
        let g = SeriesFn::poly(0.0, &[0.0, 0.0, 0.5], 12).exp();
        let tt = TauTriple::new(g.clone(), g.clone(), g, TauConstants::default()).unwrap();
        assert!(matches!(series_solve(&tt, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn closed_form_seed_has_full_row_rank() {
        let rep = series_solve_with(&closed_form_seed(12), 1, &SolveOptions::default()).unwrap();
        assert_eq!(rep.rank, rep.rows);
    }

    #[test]
    fn rank_deficiency_reported_with_order() {
        let opts = SolveOptions { rank_tol: 1e6, ..Default::default() };
        match series_solve_with(&closed_form_seed(12), 1, &opts) {
            Err(Error::RankDeficient { order: 1, rank, rows }) => assert!(rank < rows),
            other => panic!("{other:?}"),
        }
    }
}
