//! Dense complex helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Inverse of a square matrix together with its 1-norm condition number.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub matrix: CMatrix,
    pub condition: f64,
}

/// Inverts `a` by LU factorization, solving against every unit vector.
///
/// Returns `None` when a pivot vanishes. Non-finite results are reported
/// with an infinite condition number so callers can reject them.
pub fn invert(a: &CMatrix) -> Option<Inverse> {
    assert!(a.is_square(), "invert: matrix must be square");
    let k = a.nrows();
    let lu = a.clone().lu();
    let matrix = lu.solve(&CMatrix::identity(k, k))?;
    let condition = if matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        norm1(a) * norm1(&matrix)
    } else {
        f64::INFINITY
    };
    Some(Inverse { matrix, condition })
}

/// Maximum absolute column sum.
pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius_sq(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral radius of a square complex matrix.
pub fn spectral_radius(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    match a.clone().try_schur(1e-14, 10_000) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            (0..t.nrows()).map(|i| t[(i, i)].norm()).fold(0.0, f64::max)
        }
        // Gelfand's formula as a fallback: rho = lim ||A^n||^(1/n).
        None => {
            let mut power = a.clone();
            let mut n = 1;
            while n < 256 {
                power = &power * &power;
                n *= 2;
            }
            power.norm().powf(1.0 / n as f64)
        }
    }
}
