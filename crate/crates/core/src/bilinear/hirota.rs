use alloc::format;

use super::series::SeriesFn;
use crate::error::{Error, Result};

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn check_pair(f: &SeriesFn, g: &SeriesFn) -> Result<()> {
    f.same_base(g)?;
    if f.order() != g.order() {
        return Err(Error::Precondition(format!(
            "series of different orders ({} vs {})",
            f.order(),
            g.order()
        )));
    }
    Ok(())
}

/// `D_t^m f.g = sum_j (-1)^j C(m, j) f^(m-j) g^(j)`, exact to order `K - m`.
pub fn hirota_dt(m: usize, f: &SeriesFn, g: &SeriesFn) -> Result<SeriesFn> {
    check_pair(f, g)?;
    let k = f.order();
    if m > k {
        return Err(Error::Precondition(format!("operator order {m} exceeds series order {k}")));
    }
    let out_order = k - m;
    let mut acc = SeriesFn::zero(f.t0(), out_order);
    for j in 0..=m {
        let term = f.deriv_n(m - j).truncate(out_order).mul_series(&g.deriv_n(j).truncate(out_order));
        let c = if j % 2 == 0 { 1.0 } else { -1.0 } * binomial(m, j);
        acc = &acc + &term.scale(c);
    }
    Ok(acc)
}

/// Form of the three-term lattice bilinear equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BilinearVariant {
    /// `tau'' tau - tau'^2 - tau_{n+1} tau_{n-1}`.
    Printed,
    /// `tau'' tau - tau'^2 - tau_{n+1} tau_{n-1} + tau^2`.
    Standard,
}

/// Residual of the lattice bilinear equation at site `n`, order `K - 2`.
pub fn toda_bilinear_residual(
    tau_prev: &SeriesFn,
    tau: &SeriesFn,
    tau_next: &SeriesFn,
    variant: BilinearVariant,
) -> Result<SeriesFn> {
    check_pair(tau_prev, tau)?;
    check_pair(tau, tau_next)?;
    if tau.order() < 2 {
        return Err(Error::Precondition("series order must be at least 2".into()));
    }
    let k = tau.order() - 2;
    let t = tau.truncate(k);
    let d1 = tau.deriv().truncate(k);
    let d2 = tau.deriv_n(2);
    let mut r = &(&d2 * &t) - &(&d1 * &d1);
    r = &r - &(&tau_next.truncate(k) * &tau_prev.truncate(k));
    if variant == BilinearVariant::Standard {
        r = &r + &(&t * &t);
    }
    Ok(r)
}

/// `D_t^2 f_n.f_n - 4 sinh^2(D_n / 2) f_n.f_n`, using
/// `4 sinh^2(D_n/2) f.f = 2 (f_{n+1} f_{n-1} - f_n^2)`.
pub fn sinh_form_residual(f_prev: &SeriesFn, f: &SeriesFn, f_next: &SeriesFn) -> Result<SeriesFn> {
    check_pair(f_prev, f)?;
    check_pair(f, f_next)?;
    let dt2 = hirota_dt(2, f, f)?;
    let k = dt2.order();
    let t = f.truncate(k);
    let shift = &(&f_next.truncate(k) * &f_prev.truncate(k)) - &(&t * &t);
    Ok(&dt2 - &shift.scale(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_series(a: f64, k: usize) -> SeriesFn {
        SeriesFn::poly(0.0, &[0.0, a], k).exp()
    }

    fn gaussian(k: usize) -> SeriesFn {
        SeriesFn::poly(0.0, &[0.0, 0.0, 0.5], k).exp()
    }

    #[test]
    fn first_order_antisymmetric() {
        let f = SeriesFn::poly(0.0, &[1.0, 0.3, -0.2], 6);
        assert!(hirota_dt(1, &f, &f).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn exponentials() {
        let d = hirota_dt(1, &exp_series(1.0, 6), &exp_series(2.0, 6)).unwrap();
        let expect = exp_series(3.0, 5).scale(-1.0);
        assert!((&d - &expect).max_abs() < 1e-13);
    }

    #[test]
    fn gaussian_second_order() {
        let f = gaussian(12);
        let d = hirota_dt(2, &f, &f).unwrap();
        let expect = SeriesFn::poly(0.0, &[0.0, 0.0, 1.0], 10).exp().scale(2.0);
        assert!((&d - &expect).max_abs() < 1e-13);
    }

    #[test]
    fn bilinear_variants() {
        let g = gaussian(12);
        let r = toda_bilinear_residual(&g, &g, &g, BilinearVariant::Printed).unwrap();
        assert!(r.max_abs() <= 1e-12);
        let one = SeriesFn::constant(0.0, 1.0, 12);
        assert_eq!(toda_bilinear_residual(&one, &one, &one, BilinearVariant::Standard).unwrap().max_abs(), 0.0);
        let r = toda_bilinear_residual(&one, &one, &one, BilinearVariant::Printed).unwrap();
        assert_eq!(r.coeff(0), -1.0);
        assert!(r.coeffs()[1..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn sinh_form_of_gaussian() {
        let g = gaussian(12);
        let r = sinh_form_residual(&g, &g, &g).unwrap();
        assert!((r.coeff(0) - 2.0).abs() < 1e-14);
        let expect = SeriesFn::poly(0.0, &[0.0, 0.0, 1.0], 10).exp().scale(2.0);
        assert!((&r - &expect).max_abs() < 1e-13);
        let one = SeriesFn::constant(0.0, 1.0, 6);
        assert_eq!(sinh_form_residual(&one, &one, &one).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn order_too_high() {
        let f = SeriesFn::constant(0.0, 1.0, 2);
        assert!(hirota_dt(3, &f, &f).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(5, 5), 1.0);
    }
}
