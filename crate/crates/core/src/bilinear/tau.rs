use alloc::format;
use alloc::vec::Vec;

use super::series::{SeriesAlgebra, SeriesFn};
use crate::dynamics::CdwCoupling;
use crate::error::{Error, Result};
use crate::math;
use crate::model::CdwState;

/// Integration constants of the `c` variables and the exponent constant of
/// the third bilinear line. Differences `I12 = I1 - I2` etc. are derived.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TauConstants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i130: f64,
}

impl TauConstants {
    pub fn i12(&self) -> f64 {
        self.i1 - self.i2
    }

    pub fn i23(&self) -> f64 {
        self.i2 - self.i3
    }

    pub fn i13(&self) -> f64 {
        self.i1 - self.i3
    }
}

/// `(tau2, tau3, f)` about a common base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TauTriple {
    pub tau2: SeriesFn,
    pub tau3: SeriesFn,
    pub f: SeriesFn,
    pub constants: TauConstants,
}

impl TauTriple {
    pub fn new(tau2: SeriesFn, tau3: SeriesFn, f: SeriesFn, constants: TauConstants) -> Result<Self> {
        tau2.same_base(&tau3)?;
        tau2.same_base(&f)?;
        let t = Self { tau2, tau3, f, constants };
        t.check_positive()?;
        Ok(t)
    }

    fn check_positive(&self) -> Result<()> {
        for (name, s) in [("tau2", &self.tau2), ("tau3", &self.tau3), ("f", &self.f)] {
            if s.coeff(0).is_nan() || s.coeff(0) <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive at the base point, got {}", s.coeff(0))));
            }
        }
        Ok(())
    }

    pub fn t0(&self) -> f64 {
        self.tau2.t0()
    }

    pub fn order(&self) -> usize {
        self.tau2.order().min(self.tau3.order()).min(self.f.order())
    }

    pub fn parts(&self) -> [&SeriesFn; 3] {
        [&self.tau2, &self.tau3, &self.f]
    }
}

/// Which second line of the intermediate system is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SquaredForm {
    /// `(d3' - c23 d3)^2 - 4 w d2`.
    #[default]
    Printed,
    /// `(d3' - c23 d3)^2 - 4 w d2 d3`, the form implied by the
    /// three-site flow.
    Corrected,
}

impl SquaredForm {
    /// Squared-variable flow whose solutions satisfy this form.
    pub fn coupling(self) -> CdwCoupling {
        match self {
            SquaredForm::Printed => CdwCoupling::IntermediateSystem,
            SquaredForm::Corrected => CdwCoupling::Corrected,
        }
    }
}

struct Logs<T> {
    l2: T,
    l3: T,
    lf: T,
}

fn logs<T: SeriesAlgebra>(tau2: &T, tau3: &T, f: &T) -> Result<Logs<T>> {
    Ok(Logs { l2: tau2.ln()?, l3: tau3.ln()?, lf: f.ln()? })
}

/// `d2, d3, w` as `1 + (ln tau)''` and `-1 - (ln f)''`.
fn dw<T: SeriesAlgebra>(l: &Logs<T>) -> (T, T, T) {
    let d2 = l.l2.deriv().deriv().add_scalar(1.0);
    let d3 = l.l3.deriv().deriv().add_scalar(1.0);
    let w = l.lf.deriv().deriv().add_scalar(1.0).scale(-1.0);
    (d2, d3, w)
}

/// `c12, c23, c13` from the log-derivatives and constants.
fn c_diffs<T: SeriesAlgebra>(l: &Logs<T>, k: &TauConstants) -> (T, T, T) {
    let c12 = l.l2.scale(2.0).sub(&l.l3).sub(&l.lf).deriv().scale(-1.0).add_scalar(k.i12());
    let c23 = l.l2.sub(&l.l3.scale(2.0)).add(&l.lf).deriv().add_scalar(k.i23());
    let c13 = l.l2.add(&l.l3).sub(&l.lf.scale(2.0)).deriv().scale(-1.0).add_scalar(k.i13());
    (c12, c23, c13)
}

/// The three bilinear residual lines with stored constants; written over any
/// [`SeriesAlgebra`] so the epsilon expansion reuses it.
pub fn residual_lines<T: SeriesAlgebra>(
    tau2: &T,
    tau3: &T,
    f: &T,
    k: &TauConstants,
    form: SquaredForm,
) -> Result<[T; 3]> {
    let l = logs(tau2, tau3, f)?;
    let (d2, d3, w) = dw(&l);
    let (c12, c23, _) = c_diffs(&l, k);
    let r1 = l.l2.add(&l.l3).deriv().deriv().deriv().sub(&c12.mul(&d2)).sub(&c23.mul(&d3));
    let inner = l.l3.deriv().deriv().deriv().sub(&c23.mul(&d3));
    let mut coupling = d2.mul(&w).scale(-4.0);
    if form == SquaredForm::Corrected {
        coupling = coupling.mul(&d3);
    }
    let r2 = inner.mul(&inner).add(&coupling);
    let fd = f.deriv();
    let growth = tau2.mul(tau3).recip()?.mul(&tau2.affine_like(k.i130, k.i13()).exp());
    let f2 = f.mul(f);
    let r3 = fd.deriv().mul(f).sub(&fd.mul(&fd)).add(&f2).add(&f2.mul(&f2).mul(&growth));
    Ok([r1, r2, r3])
}

/// `d2 = 1 + (ln tau2)''`, `d3 = 1 + (ln tau3)''`, `w = -1 - (ln f)''`.
pub fn dw_from_tau(tt: &TauTriple) -> Result<(SeriesFn, SeriesFn, SeriesFn)> {
    tt.check_positive()?;
    Ok(dw(&logs(&tt.tau2, &tt.tau3, &tt.f)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CSeries {
    pub c1: SeriesFn,
    pub c2: SeriesFn,
    pub c3: SeriesFn,
    pub c12: SeriesFn,
    pub c23: SeriesFn,
    pub c13: SeriesFn,
}

/// `c1 = I1 - (ln tau2/f)'`, `c2 = I2 + (ln tau2/tau3)'`,
/// `c3 = I3 + (ln tau3/f)'` and their differences.
pub fn c_from_tau(tt: &TauTriple) -> Result<CSeries> {
    tt.check_positive()?;
    let l = logs(&tt.tau2, &tt.tau3, &tt.f)?;
    let k = &tt.constants;
    let c1 = (&l.l2 - &l.lf).deriv().scale(-1.0).add_scalar(k.i1);
    let c2 = (&l.l2 - &l.l3).deriv().add_scalar(k.i2);
    let c3 = (&l.l3 - &l.lf).deriv().add_scalar(k.i3);
    let (c12, c23, c13) = c_diffs(&l, k);
    Ok(CSeries { c1, c2, c3, c12, c23, c13 })
}

/// Residuals of the full bilinear system (stored constants). With all
/// constants zero this is the simplified system.
pub fn gtl_tau_residual(tt: &TauTriple, form: SquaredForm) -> Result<[SeriesFn; 3]> {
    tt.check_positive()?;
    residual_lines(&tt.tau2, &tt.tau3, &tt.f, &tt.constants, form)
}

/// Residuals of the intermediate system in `(c, d, w)`:
/// `(d2 + d3)' - c12 d2 - c23 d3`, the squared second line, `w' - c13 w`.
pub fn intermediate_residual(tt: &TauTriple, form: SquaredForm) -> Result<[SeriesFn; 3]> {
    let (d2, d3, w) = dw_from_tau(tt)?;
    let c = c_from_tau(tt)?;
    let s1 = &(&d2 + &d3).deriv() - &(&(&c.c12 * &d2) + &(&c.c23 * &d3));
    let inner = &d3.deriv() - &(&c.c23 * &d3);
    let mut coupling = (&w * &d2).scale(4.0);
    if form == SquaredForm::Corrected {
        coupling = &coupling * &d3;
    }
    let s2 = &(&inner * &inner) - &coupling;
    let s3 = &w.deriv() - &(&c.c13 * &w);
    Ok([s1, s2, s3])
}

/// Taylor coefficients of the squared-variable flow from `initial` at `t0`,
/// in the order `c1, c2, c3, d2, d3, w`.
pub fn taylor_flow(initial: &CdwState, coupling: CdwCoupling, t0: f64, order: usize) -> Result<[SeriesFn; 6]> {
    let y0 = [initial.c[0], initial.c[1], initial.c[2], initial.d2, initial.d3, initial.w];
    let mut y: Vec<SeriesFn> = y0.iter().map(|v| SeriesFn::constant(t0, *v, order)).collect();
    let sign = initial.branch.signum();
    for k in 0..order {
        let [c1, c2, c3, d2, d3, w] = [&y[0], &y[1], &y[2], &y[3], &y[4], &y[5]];
        let (k2, k3) = match coupling {
            CdwCoupling::Corrected => {
                let r = (&(w * d2) * d3).sqrt()?.scale(sign);
                (r.clone(), r)
            }
            CdwCoupling::Printed => ((w * d3).sqrt()?, (w * d2).sqrt()?),
            CdwCoupling::IntermediateSystem => {
                let r = (w * d2).sqrt()?;
                (r.clone(), r)
            }
        };
        let rates = [
            (d2 + w).scale(-1.0),
            d2 - d3,
            d3 + w,
            &(&(c1 - c2) * d2) - &k2.scale(2.0),
            &(&(c2 - c3) * d3) + &k3.scale(2.0),
            &(c1 - c3) * w,
        ];
        for (yi, ri) in y.iter_mut().zip(&rates) {
            yi.set_coeff(k + 1, ri.coeff(k) / (k + 1) as f64);
        }
    }
    Ok([y[0].clone(), y[1].clone(), y[2].clone(), y[3].clone(), y[4].clone(), y[5].clone()])
}

/// Exact tau triple about `t = 0` generated by the squared-variable flow
/// matching `form`: `(ln f)' = phi`, `phi' = -1 - w`,
/// `(ln tau2)' = phi - (c1 - I)`, `(ln tau3)' = phi + (c3 - I)`, all logs
/// zero at `t = 0`, `I1 = I2 = I3 = I` the mean of `c(0)` and
/// `I130 = ln w(0)`.
pub fn exact_seed(initial: &CdwState, form: SquaredForm, order: usize) -> Result<TauTriple> {
    if initial.w <= 0.0 {
        return Err(Error::Domain(format!("seed needs w > 0, got {}", initial.w)));
    }
    let [c1, _, c3, _, _, w] = taylor_flow(initial, form.coupling(), 0.0, order)?;
    let mean = (initial.c[0] + initial.c[1] + initial.c[2]) / 3.0;
    let phi = w.add_scalar(1.0).scale(-1.0).integrate(0.0).truncate(order);
    let lf = phi.integrate(0.0).truncate(order);
    let l2 = (&phi - &c1.add_scalar(-mean)).integrate(0.0).truncate(order);
    let l3 = (&phi + &c3.add_scalar(-mean)).integrate(0.0).truncate(order);
    TauTriple::new(
        l2.exp(),
        l3.exp(),
        lf.exp(),
        TauConstants { i1: mean, i2: mean, i3: mean, i130: math::ln(initial.w) },
    )
}

/// Closed-form triple `tau2 = tau3 = exp(-t^2/2)`, `f = exp(-t^2/2) sech t`
/// about `t = 0` (`d2 = d3 = 0`, `w = sech^2 t`, `c1 = -tanh t`). It solves
/// every line, but the squared line is degenerate there.
pub fn closed_form_seed(order: usize) -> TauTriple {
    let g = SeriesFn::poly(0.0, &[0.0, 0.0, -0.5], order).exp();
    let e = SeriesFn::poly(0.0, &[0.0, 1.0], order).exp();
    let cosh = (&e + &e.recip().expect("exp is positive")).scale(0.5);
    let f = g.div(&cosh).expect("cosh is positive");
    TauTriple::new(g.clone(), g, f, TauConstants::default()).expect("positive at 0")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(k: usize) -> SeriesFn {
        SeriesFn::poly(0.0, &[0.0, 0.0, 0.5], k).exp()
    }

    fn one(k: usize) -> SeriesFn {
        SeriesFn::constant(0.0, 1.0, k)
    }

    #[test]
    fn constant_tau() {
        let tt = TauTriple::new(one(8), one(8), one(8), TauConstants::default()).unwrap();
        let (d2, d3, w) = dw_from_tau(&tt).unwrap();
        assert_eq!(d2.coeffs()[0], 1.0);
        assert_eq!(d3.coeffs()[0], 1.0);
        assert_eq!(w.coeffs()[0], -1.0);
        let c = c_from_tau(&tt).unwrap();
        assert_eq!(c.c1.max_abs() + c.c2.max_abs() + c.c3.max_abs(), 0.0);
    }

    #[test]
    fn gaussian_tau_gives_two() {
        let tt = TauTriple::new(gaussian(8), one(8), SeriesFn::poly(0.0, &[0.0, 0.0, -1.0], 8).exp(), TauConstants::default())
            .unwrap();
        let (d2, _, w) = dw_from_tau(&tt).unwrap();
        assert!((&d2 - &SeriesFn::constant(0.0, 2.0, 6)).max_abs() < 1e-14);
        assert!((&w - &SeriesFn::constant(0.0, 1.0, 6)).max_abs() < 1e-14);
    }

    #[test]
    fn exponential_tau_gives_unit_rate() {
        let e = SeriesFn::poly(0.0, &[0.0, 1.0], 8).exp();
        let tt = TauTriple::new(e, one(8), one(8), TauConstants::default()).unwrap();
        let c = c_from_tau(&tt).unwrap();
        assert!((&c.c1 - &SeriesFn::constant(0.0, -1.0, 7)).max_abs() < 1e-14);
        assert!((&(&c.c12 + &c.c23) - &c.c13).max_abs() < 1e-14);
    }

    #[test]
    fn third_line_at_gaussian() {
        let g = gaussian(10);
        let tt = TauTriple::new(g.clone(), g.clone(), g, TauConstants::default()).unwrap();
        let r = gtl_tau_residual(&tt, SquaredForm::Printed).unwrap();
        assert!((r[2].eval(0.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_constants_match_simplified_lines() {
        let g = gaussian(10);
        let h = SeriesFn::poly(0.0, &[1.0, 0.3, -0.2, 0.1], 10);
        let tt = TauTriple::new(g, h.clone(), h, TauConstants::default()).unwrap();
        let a = gtl_tau_residual(&tt, SquaredForm::Printed).unwrap();
        let b = residual_lines(&tt.tau2, &tt.tau3, &tt.f, &TauConstants::default(), SquaredForm::Printed).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_seeds_solve_both_levels() {
        let init = CdwState { c: [0.3, -0.1, 0.5], d2: 0.8, d3: 1.2, w: 0.6, branch: 1.0 };
        for form in [SquaredForm::Printed, SquaredForm::Corrected] {
            let tt = exact_seed(&init, form, 12).unwrap();
            for r in intermediate_residual(&tt, form).unwrap() {
                assert!(r.max_abs() < 1e-10, "{form:?} {}", r.max_abs());
            }
            for r in gtl_tau_residual(&tt, form).unwrap() {
                assert!(r.max_abs() < 1e-10, "{form:?} {}", r.max_abs());
            }
            let (d2, d3, w) = dw_from_tau(&tt).unwrap();
            assert!((d2.coeff(0) - 0.8).abs() < 1e-14);
            assert!((d3.coeff(0) - 1.2).abs() < 1e-14);
            assert!((w.coeff(0) - 0.6).abs() < 1e-14);
            let c = c_from_tau(&tt).unwrap();
            assert!((c.c1.coeff(0) - 0.3).abs() < 1e-14);
            assert!((c.c2.coeff(0) + 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_seed_solves() {
        let tt = closed_form_seed(12);
        for form in [SquaredForm::Printed, SquaredForm::Corrected] {
            for r in gtl_tau_residual(&tt, form).unwrap() {
                assert!(r.max_abs() < 1e-12, "{}", r.max_abs());
            }
        }
        let (_, _, w) = dw_from_tau(&tt).unwrap();
        assert!((w.coeff(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn positivity_required() {
        let z = SeriesFn::constant(0.0, 0.0, 4);
        assert!(TauTriple::new(z.clone(), one(4), one(4), TauConstants::default()).is_err());
    }
}
