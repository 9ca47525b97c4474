//! Hermitian positive-definite Toeplitz systems.
//!
//! [`levinson_solve`] is the O(N^2) workhorse; [`cholesky_solve`] builds the
//! dense matrix and factors it with nalgebra, which is slower but independent.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense Hermitian Toeplitz matrix with first column `r`.
pub fn dense(r: &[Complex64]) -> DMatrix<Complex64> {
    let n = r.len();
    DMatrix::from_fn(n, n, |i, j| if i >= j { r[i - j] } else { r[j - i].conj() })
}

/// Solve `T x_j = b_j` for every right-hand side, `T` Hermitian Toeplitz with
/// first column `r`. Fails with `CovarianceNotPD` as soon as a leading
/// principal minor stops being positive.
pub fn levinson_solve(r: &[Complex64], rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let n = r.len();
    for b in rhs {
        assert_eq!(b.len(), n, "right-hand side length must match the matrix");
    }
    if n == 0 {
        return Ok(rhs.to_vec());
    }
    let r0 = r[0].re;
    if !(r0 > 0.0) {
        return Err(Error::CovarianceNotPD { order: 1 });
    }
    // fwd solves T_m f = e_1, bwd solves T_m b = e_m.
    let mut fwd = vec![Complex64::new(0.0, 0.0); n];
    let mut bwd = vec![Complex64::new(0.0, 0.0); n];
    let mut nf = vec![Complex64::new(0.0, 0.0); n];
    let mut nb = vec![Complex64::new(0.0, 0.0); n];
    fwd[0] = Complex64::new(1.0 / r0, 0.0);
    bwd[0] = fwd[0];
    let mut xs: Vec<Vec<Complex64>> = rhs
        .iter()
        .map(|b| {
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            x[0] = b[0] / r0;
            x
        })
        .collect();

    for m in 1..n {
        // Residuals of the extended vectors [f; 0] and [0; b] on the new row/column.
        let mut ef = Complex64::new(0.0, 0.0);
        let mut eb = Complex64::new(0.0, 0.0);
        for i in 0..m {
            ef += r[m - i] * fwd[i];
            eb += r[i + 1].conj() * bwd[i];
        }
        let denom = Complex64::new(1.0, 0.0) - ef * eb;
        if !(denom.re > 1e-14) {
            return Err(Error::CovarianceNotPD { order: m + 1 });
        }
        let inv = 1.0 / denom;
        for i in 0..=m {
            let f_ext = if i < m { fwd[i] } else { Complex64::new(0.0, 0.0) };
            let b_ext = if i > 0 { bwd[i - 1] } else { Complex64::new(0.0, 0.0) };
            nf[i] = (f_ext - ef * b_ext) * inv;
            nb[i] = (b_ext - eb * f_ext) * inv;
        }
        fwd[..=m].copy_from_slice(&nf[..=m]);
        bwd[..=m].copy_from_slice(&nb[..=m]);
        for (x, b) in xs.iter_mut().zip(rhs) {
            let mut ex = Complex64::new(0.0, 0.0);
            for i in 0..m {
                ex += r[m - i] * x[i];
            }
            let c = b[m] - ex;
            for i in 0..=m {
                x[i] += c * bwd[i];
            }
        }
    }
    Ok(xs)
}

/// Same contract as [`levinson_solve`], through a dense Cholesky factorization.
pub fn cholesky_solve(r: &[Complex64], rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let n = r.len();
    let chol = dense(r).cholesky().ok_or(Error::CovarianceNotPD { order: n })?;
    // Complex square roots never fail, so check the factor's diagonal instead.
    if let Some(i) = chol.l_dirty().diagonal().iter().position(|d| !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re) {
        return Err(Error::CovarianceNotPD { order: i + 1 });
    }
    Ok(rhs
        .iter()
        .map(|b| chol.solve(&DVector::from_column_slice(b)).iter().copied().collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kms(n: usize, rho: Complex64) -> Vec<Complex64> {
        (0..n).map(|k| rho.powu(k as u32)).collect()
    }

    #[test]
    fn matches_dense_solution() {
        let r = kms(40, Complex64::new(0.5, 0.3));
        let b: Vec<Complex64> = (0..40).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let x = levinson_solve(&r, &[b.clone()]).unwrap();
        let t = dense(&r);
        let back = &t * DVector::from_column_slice(&x[0]);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-10);
        }
        let y = cholesky_solve(&r, &[b]).unwrap();
        for (u, v) in x[0].iter().zip(&y[0]) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let r = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)];
        let b = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(levinson_solve(&r, &[b.clone()]), Err(Error::CovarianceNotPD { order: 2 })));
        assert!(matches!(cholesky_solve(&r, &[b]), Err(Error::CovarianceNotPD { .. })));
    }
}
