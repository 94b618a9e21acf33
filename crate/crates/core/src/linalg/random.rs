use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Matrix, Qr, Vector, C64};

/// Caller-owned deterministic generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard normal real and imaginary parts.
pub fn random_complex_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Real vector with standard normal entries.
pub fn random_real_vector<R: Rng>(n: usize, rng: &mut R) -> Vector {
    (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), 0.0))
        .collect()
}

/// Real orthogonal `n x n` matrix: the Q factor of a seeded standard normal
/// matrix, with the signs fixed so that `diag(R) > 0`.
pub fn random_orthogonal(n: usize, seed: u64) -> Matrix {
    assert!(n >= 1, "random_orthogonal needs n >= 1");
    let mut rng = seeded_rng(seed);
    let g = Matrix::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), 0.0));
    Qr::new(&g).into_parts().0
}
