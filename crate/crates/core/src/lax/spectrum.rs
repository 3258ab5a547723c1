use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMethod {
    /// Closed-form roots of the characteristic polynomial (2x2 and 3x3).
    Charpoly,
    /// Cyclic Jacobi rotations (real symmetric input of any size).
    SymmetricJacobi,
}

impl SpectrumMethod {
    pub fn tag(self) -> &'static str {
        match self {
            SpectrumMethod::Charpoly => "charpoly3",
            SpectrumMethod::SymmetricJacobi => "symmetric_jacobi",
        }
    }
}

/// Eigenvalues sorted by real part, then imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub method: SpectrumMethod,
}

impl Spectrum {
    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }
}

const SYMMETRY_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a square matrix: closed form for dimensions 2 and 3,
/// Jacobi iteration for larger symmetric matrices. Larger non-symmetric
/// matrices are not supported.
pub fn spectrum(l: &Mat) -> Result<Spectrum> {
    if !l.is_square() || l.rows() < 2 {
        return Err(Error::Dimension(format!(
            "spectrum needs a square matrix of dimension >= 2, got {}x{}",
            l.rows(),
            l.cols()
        )));
    }
    if !l.is_finite() {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let scale = l.max_abs().max(1.0);
    let symmetric = l.is_symmetric(SYMMETRY_TOL * scale);
    let (mut eigenvalues, method) = match l.rows() {
        2 => (quadratic_roots(l, symmetric), SpectrumMethod::Charpoly),
        3 => (cubic_roots(l, symmetric), SpectrumMethod::Charpoly),
        _ if symmetric => (
            jacobi_eigenvalues(l)?.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
            SpectrumMethod::SymmetricJacobi,
        ),
        n => {
            return Err(Error::Unsupported(format!(
                "eigenvalues of a non-symmetric {n}x{n} matrix"
            )))
        }
    };
    eigenvalues.sort_by(|a, b| match a.re.total_cmp(&b.re) {
        Ordering::Equal => a.im.total_cmp(&b.im),
        o => o,
    });
    Ok(Spectrum { eigenvalues, method })
}

fn quadratic_roots(l: &Mat, symmetric: bool) -> Vec<Complex64> {
    let tr = l.trace();
    let det = l[(0, 0)] * l[(1, 1)] - l[(0, 1)] * l[(1, 0)];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 || symmetric {
        let r = math::sqrt(disc.max(0.0));
        // avoid cancellation in the smaller root
        let big = if half >= 0.0 { half + r } else { half - r };
        let small = if big != 0.0 { det / big } else { 0.0 };
        alloc::vec![Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let r = math::sqrt(-disc);
        alloc::vec![Complex64::new(half, -r), Complex64::new(half, r)]
    }
}

/// Roots of `x^3 + a x^2 + b x + c`, real roots polished by Newton steps.
fn cubic_roots(l: &Mat, symmetric: bool) -> Vec<Complex64> {
    let m = |i: usize, j: usize| l[(i, j)];
    let tr = l.trace();
    let minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)
        + m(1, 1) * m(2, 2)
        - m(1, 2) * m(2, 1);
    let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
        - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    let (a, b, c) = (-tr, minors, -det);
    let shift = -a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let scale = (p.abs() / 3.0).max(1e-300);
    let real_three = symmetric || disc <= 1e-14 * scale * scale * scale;

    let poly = |x: f64| ((x + a) * x + b) * x + c;
    let dpoly = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    let polish = |mut x: f64| {
        for _ in 0..3 {
            let d = dpoly(x);
            if d.abs() < 1e-300 {
                break;
            }
            let step = poly(x) / d;
            let next = x - step;
            if !next.is_finite() || poly(next).abs() > poly(x).abs() {
                break;
            }
            x = next;
        }
        x
    };

    if real_three {
        if p.abs() < 1e-300 {
            let r = math::cbrt(-q) + shift;
            return alloc::vec![Complex64::new(r, 0.0); 3];
        }
        let p = p.min(0.0);
        let r = 2.0 * math::sqrt(-p / 3.0);
        let arg = if r == 0.0 {
            0.0
        } else {
            (3.0 * q / (p * r)).clamp(-1.0, 1.0)
        };
        let theta = math::acos(arg) / 3.0;
        let two_pi_3 = 2.0 * core::f64::consts::PI / 3.0;
        (0..3)
            .map(|k| {
                let x = r * math::cos(theta - two_pi_3 * k as f64) + shift;
                Complex64::new(polish(x), 0.0)
            })
            .collect()
    } else {
        let sq = math::sqrt(disc);
        let u = math::cbrt(-q / 2.0 + sq);
        let v = math::cbrt(-q / 2.0 - sq);
        let x1 = polish(u + v + shift);
        // deflate: remaining quadratic x^2 + (a + x1) x + (b + (a + x1) x1)
        let bb = a + x1;
        let cc = b + bb * x1;
        let half = -bb / 2.0;
        let d = half * half - cc;
        let im = math::sqrt((-d).max(0.0));
        alloc::vec![
            Complex64::new(x1, 0.0),
            Complex64::new(half, im),
            Complex64::new(half, -im),
        ]
    }
}

/// Cyclic Jacobi sweeps until the off-diagonal mass drops below `1e-12`
/// relative to the Frobenius norm.
fn jacobi_eigenvalues(l: &Mat) -> Result<Vec<f64>> {
    let n = l.rows();
    let mut a = l.clone();
    let frob = math::sqrt(a.as_slice().iter().map(|x| x * x).sum::<f64>()).max(1e-300);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if math::sqrt(off) <= 1e-12 * frob {
            return Ok((0..n).map(|i| a[(i, i)]).collect());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + math::hypot(theta, 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::hypot(t, 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: JACOBI_MAX_SWEEPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(s: &Spectrum) -> Vec<f64> {
        s.real_parts()
    }

    #[test]
    fn tridiagonal_at_rest() {
        let l = Mat::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]).unwrap();
        let s = spectrum(&l).unwrap();
        let r2 = core::f64::consts::SQRT_2;
        for (x, y) in real(&s).iter().zip([-r2, 0.0, r2]) {
            assert!((x - y).abs() < 1e-14, "{x} vs {y}");
        }
        assert_eq!(s.method, SpectrumMethod::Charpoly);
        assert_eq!(s.max_imag(), 0.0);
    }

    #[test]
    fn corner_coupling_only() {
        let l = Mat::from_rows(&[[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let s = spectrum(&l).unwrap();
        for (x, y) in real(&s).iter().zip([-1.0, 0.0, 1.0]) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_matrix() {
        let l = Mat::from_rows(&[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]).unwrap();
        for (x, y) in real(&spectrum(&l).unwrap()).iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_pair_from_rotation_block() {
        let l = Mat::from_rows(&[[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]]).unwrap();
        let s = spectrum(&l).unwrap();
        assert!((s.eigenvalues[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((s.eigenvalues[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((s.eigenvalues[2] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn jacobi_on_five_by_five() {
        // path graph P5: eigenvalues 2 cos(k pi / 6)
        let l = Mat::from_fn(5, 5, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let s = spectrum(&l).unwrap();
        assert_eq!(s.method, SpectrumMethod::SymmetricJacobi);
        let mut want: Vec<f64> = (1..=5)
            .map(|k| 2.0 * math::cos(k as f64 * core::f64::consts::PI / 6.0))
            .collect();
        want.sort_by(f64::total_cmp);
        for (x, y) in real(&s).iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two() {
        let l = Mat::from_rows(&[[1.0, 1.0], [-1.0, 0.0]]).unwrap();
        let s = spectrum(&l).unwrap();
        // x^2 - x + 1: (1 +- i sqrt 3) / 2
        assert!((s.eigenvalues[0] - Complex64::new(0.5, -math::sqrt(0.75))).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(spectrum(&Mat::identity(1)).is_err());
        assert!(spectrum(&Mat::zeros(2, 3)).is_err());
        let ns = Mat::from_fn(4, 4, |i, j| if j == i + 1 { 1.0 } else { 0.0 });
        assert!(matches!(spectrum(&ns), Err(Error::Unsupported(_))));
    }
}
