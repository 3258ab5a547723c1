use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::math;

/// Truncated Taylor series `sum_k c_k (t - t0)^k`, `k = 0..=K`. Binary
/// operations truncate to the smaller order.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesFn {
    t0: f64,
    coeffs: Vec<f64>,
}

impl SeriesFn {
    pub fn new(t0: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension("series needs at least one coefficient".into()));
        }
        if !t0.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite series data".into()));
        }
        Ok(Self { t0, coeffs })
    }

    pub fn constant(t0: f64, c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Self { t0, coeffs }
    }

    pub fn zero(t0: f64, order: usize) -> Self {
        Self::constant(t0, 0.0, order)
    }

    /// The function `a + b t` expanded about `t0`.
    pub fn affine(t0: f64, a: f64, b: f64, order: usize) -> Self {
        let mut s = Self::constant(t0, a + b * t0, order);
        if order >= 1 {
            s.coeffs[1] = b;
        }
        s
    }

    /// Polynomial in `t - t0` (missing coefficients are zero).
    pub fn poly(t0: f64, coeffs: &[f64], order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        Self { t0, coeffs: c }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, k: usize, v: f64) {
        self.coeffs[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Self { t0: self.t0, coeffs }
    }

    /// Horner evaluation at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let x = t - self.t0;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn check_base(&self, other: &Self) {
        assert!(
            self.t0 == other.t0,
            "series about different base points ({} vs {})",
            self.t0,
            other.t0
        );
    }

    pub fn same_base(&self, other: &Self) -> Result<()> {
        if self.t0 != other.t0 {
            return Err(Error::Precondition(format!(
                "series about different base points ({} vs {})",
                self.t0, other.t0
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.check_base(other);
        let k = self.coeffs.len().min(other.coeffs.len());
        Self { t0: self.t0, coeffs: (0..k).map(|i| f(self.coeffs[i], other.coeffs[i])).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { t0: self.t0, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Cauchy product.
    pub fn mul_series(&self, other: &Self) -> Self {
        self.check_base(other);
        let k = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..k)
            .map(|n| (0..=n).map(|j| self.coeffs[j] * other.coeffs[n - j]).sum())
            .collect();
        Self { t0: self.t0, coeffs }
    }

    /// Derivative; an order-`K` series becomes order `K - 1` (order 0 stays
    /// the zero constant).
    pub fn deriv(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(self.t0, 0);
        }
        let coeffs = (1..self.coeffs.len()).map(|k| k as f64 * self.coeffs[k]).collect();
        Self { t0: self.t0, coeffs }
    }

    pub fn deriv_n(&self, m: usize) -> Self {
        (0..m).fold(self.clone(), |s, _| s.deriv())
    }

    /// Antiderivative with value `c` at `t0`; order grows by one.
    pub fn integrate(&self, c: f64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(c);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, a)| a / (k + 1) as f64));
        Self { t0: self.t0, coeffs }
    }

    pub fn recip(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 {
            return Err(Error::Domain("reciprocal of a series with zero constant term".into()));
        }
        let mut r = vec![0.0; self.coeffs.len()];
        r[0] = 1.0 / a0;
        for n in 1..r.len() {
            let s: f64 = (1..=n).map(|j| self.coeffs[j] * r[n - j]).sum();
            r[n] = -s / a0;
        }
        Ok(Self { t0: self.t0, coeffs: r })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_series(&other.recip()?))
    }

    /// `ln` via `n b_n a_0 = n a_n - sum_{j=1}^{n-1} j b_j a_{n-j}`.
    pub fn ln(&self) -> Result<Self> {
        let a = &self.coeffs;
        if a[0] <= 0.0 {
            return Err(Error::Domain(format!("ln of a series with constant term {}", a[0])));
        }
        let mut b = vec![0.0; a.len()];
        b[0] = math::ln(a[0]);
        for n in 1..a.len() {
            let s: f64 = (1..n).map(|j| j as f64 * b[j] * a[n - j]).sum();
            b[n] = (n as f64 * a[n] - s) / (n as f64 * a[0]);
        }
        Ok(Self { t0: self.t0, coeffs: b })
    }

    /// `exp` via `n e_n = sum_{j=1}^{n} j b_j e_{n-j}`.
    pub fn exp(&self) -> Self {
        let b = &self.coeffs;
        let mut e = vec![0.0; b.len()];
        e[0] = math::exp(b[0]);
        for n in 1..b.len() {
            let s: f64 = (1..=n).map(|j| j as f64 * b[j] * e[n - j]).sum();
            e[n] = s / n as f64;
        }
        Self { t0: self.t0, coeffs: e }
    }

    /// Principal square root; needs a positive constant term.
    pub fn sqrt(&self) -> Result<Self> {
        let a = &self.coeffs;
        if a[0] <= 0.0 {
            return Err(Error::Domain(format!("sqrt of a series with constant term {}", a[0])));
        }
        let mut r = vec![0.0; a.len()];
        r[0] = math::sqrt(a[0]);
        for n in 1..a.len() {
            let s: f64 = (1..n).map(|j| r[j] * r[n - j]).sum();
            r[n] = (a[n] - s) / (2.0 * r[0]);
        }
        Ok(Self { t0: self.t0, coeffs: r })
    }

    pub fn square(&self) -> Self {
        self.mul_series(self)
    }
}

impl Add for &SeriesFn {
    type Output = SeriesFn;
    fn add(self, rhs: &SeriesFn) -> SeriesFn {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SeriesFn {
    type Output = SeriesFn;
    fn sub(self, rhs: &SeriesFn) -> SeriesFn {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &SeriesFn {
    type Output = SeriesFn;
    fn mul(self, rhs: &SeriesFn) -> SeriesFn {
        self.mul_series(rhs)
    }
}

impl Neg for &SeriesFn {
    type Output = SeriesFn;
    fn neg(self) -> SeriesFn {
        self.scale(-1.0)
    }
}

/// Operations shared by t-series and their epsilon-graded families, so the
/// tau residuals are written once.
pub trait SeriesAlgebra: Clone + Sized {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn add_scalar(&self, s: f64) -> Self;
    fn deriv(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn exp(&self) -> Self;
    fn recip(&self) -> Result<Self>;
    /// `a + b t` with the same shape as `self`.
    fn affine_like(&self, a: f64, b: f64) -> Self;
}

impl SeriesAlgebra for SeriesFn {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_series(o)
    }
    fn scale(&self, s: f64) -> Self {
        SeriesFn::scale(self, s)
    }
    fn add_scalar(&self, s: f64) -> Self {
        SeriesFn::add_scalar(self, s)
    }
    fn deriv(&self) -> Self {
        SeriesFn::deriv(self)
    }
    fn ln(&self) -> Result<Self> {
        SeriesFn::ln(self)
    }
    fn exp(&self) -> Self {
        SeriesFn::exp(self)
    }
    fn recip(&self) -> Result<Self> {
        SeriesFn::recip(self)
    }
    fn affine_like(&self, a: f64, b: f64) -> Self {
        SeriesFn::affine(self.t0, a, b, self.order())
    }
}
