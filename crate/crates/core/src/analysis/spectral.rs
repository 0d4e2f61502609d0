use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::operators::ComplexMatrix;
use crate::{Error, Result};

const SCHUR_MAX_ITER: usize = 10_000;
const CROSS_CHECK_TOL: f64 = 1e-8;

/// `max |eigenvalue|` of a square complex matrix.
///
/// Eigenvalues come from a dense Schur decomposition. When the input is real
/// and entrywise nonnegative the result is also obtained independently by
/// [`nonnegative_spectral_radius`] and the two must agree to `1e-8`.
pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(
            "spectral radius needs a square matrix".into(),
        ));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    if m.iter().all(|z| z.im == 0.0) {
        return spectral_radius_real(&m.map(|z| z.re));
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::NonConvergence("complex Schur decomposition".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::NonConvergence("complex Schur form not triangular".into()))?;
    Ok(eig.iter().map(|z: &Complex64| z.norm()).fold(0.0, f64::max))
}

/// Real-matrix variant of [`spectral_radius`].
pub fn spectral_radius_real(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(
            "spectral radius needs a square matrix".into(),
        ));
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::NonConvergence("real Schur decomposition".into()))?;
    let r = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if m.iter().all(|&v| v >= 0.0) {
        let perron = nonnegative_spectral_radius(m);
        let scale = 1.0f64.max(perron);
        if (r - perron).abs() > CROSS_CHECK_TOL * scale {
            return Err(Error::NonConvergence(format!(
                "eigensolver radius {r} disagrees with Perron bound {perron}"
            )));
        }
    }
    Ok(r)
}

/// `tI - A` is a nonsingular M-matrix iff Gaussian elimination without
/// pivoting produces only positive pivots.
fn is_nonsingular_m_matrix(a: &DMatrix<f64>, t: f64) -> bool {
    let n = a.nrows();
    let mut z = -a.clone();
    for i in 0..n {
        z[(i, i)] += t;
    }
    for k in 0..n {
        let pivot = z[(k, k)];
        if !(pivot > 0.0) {
            return false;
        }
        for i in k + 1..n {
            let f = z[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                z[(i, j)] -= f * z[(k, j)];
            }
        }
    }
    true
}

/// Perron root of an entrywise nonnegative matrix.
///
/// Bisects on `t` for the smallest value at which `tI - A` is a nonsingular
/// M-matrix; that threshold is `r(A)`. No eigenvalues are computed, so this
/// is independent of [`spectral_radius`].
pub fn nonnegative_spectral_radius(a: &DMatrix<f64>) -> f64 {
    assert!(a.is_square());
    debug_assert!(a.iter().all(|&v| v >= 0.0));
    if a.nrows() == 0 {
        return 0.0;
    }
    let row_max = a
        .row_iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(0.0, f64::max);
    if row_max == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, row_max * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if is_nonsingular_m_matrix(a, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
