use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// How the second grid coordinate relates to the hierarchy time `t2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TimeAxis {
    /// The coordinate is `t2` itself.
    #[default]
    Real,
    /// The coordinate is `s` with `t2 = i s`, so `d/dt2 = -i d/ds`.
    Imaginary,
}

/// Complex samples on a uniform `(t1, x2)` grid, row-major in `t1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn2 {
    pub n1: usize,
    pub n2: usize,
    pub h1: f64,
    pub h2: f64,
    pub origin: (f64, f64),
    pub axis: TimeAxis,
    pub data: Vec<Complex64>,
}

const MIN_POINTS: usize = 5;

impl GridFn2 {
    pub fn from_fn(
        n1: usize,
        n2: usize,
        h: (f64, f64),
        origin: (f64, f64),
        axis: TimeAxis,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self> {
        if n1 < MIN_POINTS || n2 < MIN_POINTS {
            return Err(Error::Precondition(format!("grid must be at least 5x5, got {n1}x{n2}")));
        }
        if !(h.0 > 0.0 && h.1 > 0.0) {
            return Err(Error::Precondition("grid spacings must be positive".into()));
        }
        let mut data = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                data.push(f(origin.0 + i as f64 * h.0, origin.1 + j as f64 * h.1));
            }
        }
        Ok(Self { n1, n2, h1: h.0, h2: h.1, origin, axis, data })
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n2 + j]
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin.0 + i as f64 * self.h1, self.origin.1 + j as f64 * self.h2)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn same_grid(&self, o: &Self) -> Result<()> {
        if self.n1 != o.n1 || self.n2 != o.n2 || self.h1 != o.h1 || self.h2 != o.h2 || self.origin != o.origin || self.axis != o.axis
        {
            return Err(Error::Precondition("grid functions live on different grids".into()));
        }
        Ok(())
    }

    /// Fourth-order central differences at an interior point.
    fn d1(&self, i: usize, j: usize) -> Complex64 {
        (-self.at(i + 2, j) + self.at(i + 1, j) * 8.0 - self.at(i - 1, j) * 8.0 + self.at(i - 2, j)) / (12.0 * self.h1)
    }

    fn d11(&self, i: usize, j: usize) -> Complex64 {
        (-self.at(i + 2, j) + self.at(i + 1, j) * 16.0 - self.at(i, j) * 30.0 + self.at(i - 1, j) * 16.0
            - self.at(i - 2, j))
            / (12.0 * self.h1 * self.h1)
    }

    fn d2(&self, i: usize, j: usize) -> Complex64 {
        (-self.at(i, j + 2) + self.at(i, j + 1) * 8.0 - self.at(i, j - 1) * 8.0 + self.at(i, j - 2)) / (12.0 * self.h2)
    }

    /// Derivative in the hierarchy time `t2`.
    fn dt2(&self, i: usize, j: usize) -> Complex64 {
        match self.axis {
            TimeAxis::Real => self.d2(i, j),
            TimeAxis::Imaginary => self.d2(i, j) * Complex64::new(0.0, -1.0),
        }
    }

    /// Grid of the interior points (two away from each edge).
    fn interior(&self, f: impl Fn(usize, usize) -> Complex64) -> GridFn2 {
        let (n1, n2) = (self.n1 - 4, self.n2 - 4);
        let mut data = Vec::with_capacity(n1 * n2);
        for i in 2..self.n1 - 2 {
            for j in 2..self.n2 - 2 {
                data.push(f(i, j));
            }
        }
        GridFn2 {
            n1,
            n2,
            h1: self.h1,
            h2: self.h2,
            origin: self.coords(2, 2),
            axis: self.axis,
            data,
        }
    }
}

/// `r1 = (D2 - D1^2) tau_{n+1}.tau_n`, `r2 = D1^2 tau_n.tau_n - 2 tau_{n+1} tau_{n-1}`
/// on interior points, `D2` acting in the hierarchy time `t2`.
pub fn nls_bilinear_residual(tau_prev: &GridFn2, tau: &GridFn2, tau_next: &GridFn2) -> Result<(GridFn2, GridFn2)> {
    tau.same_grid(tau_prev)?;
    tau.same_grid(tau_next)?;
    let r1 = tau.interior(|i, j| {
        let (f, g) = (tau_next, tau);
        let d2 = f.dt2(i, j) * g.at(i, j) - f.at(i, j) * g.dt2(i, j);
        let d11 = f.d11(i, j) * g.at(i, j) - f.d1(i, j) * g.d1(i, j) * 2.0 + f.at(i, j) * g.d11(i, j);
        d2 - d11
    });
    let r2 = tau.interior(|i, j| {
        let d11 = (tau.d11(i, j) * tau.at(i, j) - tau.d1(i, j) * tau.d1(i, j)) * 2.0;
        d11 - tau_next.at(i, j) * tau_prev.at(i, j) * 2.0
    });
    Ok((r1, r2))
}

/// `i phi_x + phi_{t1 t1} + 2 phi^2 phibar` on interior points, `x` the second
/// grid coordinate (the Schrodinger time). `phibar` is supplied separately.
pub fn nlse_residual(phi: &GridFn2, phibar: &GridFn2) -> Result<GridFn2> {
    phi.same_grid(phibar)?;
    let i_unit = Complex64::new(0.0, 1.0);
    Ok(phi.interior(|i, j| {
        let p = phi.at(i, j);
        i_unit * phi.d2(i, j) + phi.d11(i, j) + p * p * phibar.at(i, j) * 2.0
    }))
}
