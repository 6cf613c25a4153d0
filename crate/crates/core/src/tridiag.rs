//! Banded solvers used by the implicit time stepper and the elliptic solver.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves a complex tridiagonal system by the Thomas algorithm.
///
/// `lower[i]` couples row `i` to `i-1` (ignored for `i = 0`), `upper[i]` couples `i` to `i+1`.
pub fn solve_complex(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    if denom.norm() == 0.0 {
        return Err(Error::SingularSystem(0));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom.norm() == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem(i));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { Complex64::new(0.0, 0.0) };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    Ok(d)
}

/// LDL^T factorization of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct SymmetricTridiagonal {
    pivots: Vec<f64>,
    multipliers: Vec<f64>,
}

impl SymmetricTridiagonal {
    /// Factors the matrix with diagonal `diag` and off-diagonal `off` (`off[i]` couples `i` and `i+1`).
    /// Fails if a pivot is not positive relative to the diagonal scale.
    pub fn factor(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut pivots = vec![0.0; n];
        let mut multipliers = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut d = diag[i];
            if i > 0 {
                d -= multipliers[i - 1] * off[i - 1];
            }
            if !(d > 1e-14 * diag[i].abs()) || !d.is_finite() {
                return Err(Error::SingularSystem(i));
            }
            pivots[i] = d;
            if i + 1 < n {
                multipliers[i] = off[i] / d;
            }
        }
        Ok(SymmetricTridiagonal {
            pivots,
            multipliers,
        })
    }

    pub fn smallest_pivot(&self) -> f64 {
        self.pivots.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= self.multipliers[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            y[i] -= self.multipliers[i] * y[i + 1];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_solve_matches_product() {
        let n = 7;
        let c = |a: f64, b: f64| Complex64::new(a, b);
        let lower: Vec<_> = (0..n).map(|i| c(-1.0, 0.1 * i as f64)).collect();
        let diag: Vec<_> = (0..n).map(|i| c(4.0, -0.2 * i as f64)).collect();
        let upper: Vec<_> = vec![c(-1.0, 0.3) * (1.0 + 0.01 * n as f64); n];
        let x: Vec<_> = (0..n).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let mut b = vec![c(0.0, 0.0); n];
        for i in 0..n {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += lower[i] * x[i - 1];
            }
            if i + 1 < n {
                b[i] += upper[i] * x[i + 1];
            }
        }
        let got = solve_complex(&lower, &diag, &upper, &b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn ldlt_solves_laplacian() {
        let n = 10;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let f = SymmetricTridiagonal::factor(&diag, &off).unwrap();
        assert!(f.smallest_pivot() > 0.0);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = 2.0 * x[i] - if i > 0 { x[i - 1] } else { 0.0 } - if i + 1 < n { x[i + 1] } else { 0.0 };
        }
        let got = f.solve(&b);
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let diag = vec![1.0, -1.0];
        let off = vec![0.0];
        assert!(matches!(
            SymmetricTridiagonal::factor(&diag, &off),
            Err(Error::SingularSystem(1))
        ));
    }
}
