//! Dense complex linear algebra used by every other module.
//!
//! Matrices are stored column-major. Everything works in complex double
//! precision, real problems simply carry zero imaginary parts.

mod decomp;
mod eig;
mod givens;
mod matrix;
mod random;
mod vector;

pub use decomp::{solve_small_dense, Cholesky, Lu, Qr};
pub use eig::{hermitian_eig, singular_values, HermitianEigenDecomposition, Svd};
pub use givens::{givens_qr_step, Givens};
pub use matrix::Matrix;
pub use random::{random_complex_matrix, random_orthogonal, random_real_vector, seeded_rng};
pub use vector::{hermitian_inner_product, Vector};

pub use num_complex::Complex64 as C64;

/// Shorthand for a complex number with zero imaginary part.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Conjugate dot product `xᴴy` without length checks.
#[inline]
pub(crate) fn dotc(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[inline]
pub(crate) fn norm2(x: &[C64]) -> f64 {
    // scaled accumulation keeps tiny and huge vectors finite
    let scale = x.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = x
        .iter()
        .map(|z| {
            let (a, b) = (z.re / scale, z.im / scale);
            a * a + b * b
        })
        .sum();
    scale * sum.sqrt()
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
