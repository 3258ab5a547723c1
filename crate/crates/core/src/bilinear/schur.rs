use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Coefficients `h_0..=h_n` of `exp(sum_k d_k z^k)`, where `d[k-1]` holds
/// `d_k` (that is `D_k / k`). Uses `n h_n = sum_k k d_k h_{n-k}`.
pub fn schur_all(n: usize, d: &[f64]) -> Result<Vec<f64>> {
    if d.len() < n {
        return Err(Error::Precondition(format!("need {n} coefficients, got {}", d.len())));
    }
    let mut h = vec![0.0; n + 1];
    h[0] = 1.0;
    for m in 1..=n {
        let s: f64 = (1..=m).map(|k| k as f64 * d[k - 1] * h[m - k]).sum();
        h[m] = s / m as f64;
    }
    Ok(h)
}

pub fn schur_h(n: usize, d: &[f64]) -> Result<f64> {
    Ok(schur_all(n, d)?[n])
}
