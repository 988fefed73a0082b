//! Dense Cholesky factorisation and the Thomas tridiagonal solve.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Lower-triangular Cholesky factor stored row-major, `n x n`.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a` (row-major, symmetric). On failure adds `1e-12 * max diag`
    /// to the diagonal, at most twice.
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0_f64, f64::max);
        let mut jitter = 0.0;
        let mut last_pivot = 0;
        for _ in 0..3 {
            match Self::try_factor(a, n, jitter) {
                Ok(l) => return Ok(Self { n, l }),
                Err(pivot) => last_pivot = pivot,
            }
            jitter += 1e-12 * max_diag;
        }
        Err(Error::NotPositiveDefinite {
            pivot: last_pivot,
            jitter_attempts: 2,
        })
    }

    fn try_factor(a: &[f64], n: usize, jitter: f64) -> core::result::Result<Vec<f64>, usize> {
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j] + jitter;
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(j);
            }
            let djj = libm::sqrt(d);
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(l)
    }

    /// `out = L z`.
    pub fn mul_lower(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i + 1];
            out[i] = row.iter().zip(&z[..=i]).map(|(a, b)| a * b).sum();
        }
    }
}

/// Solves a tridiagonal system in place: `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored. `scratch` must hold `n` values.
pub(crate) fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) {
    let n = diag.len();
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}
