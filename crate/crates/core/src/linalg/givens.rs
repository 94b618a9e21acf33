use super::{Vector, C64};

/// Complex plane rotation `[c s; -s̄ c]` with real `c`.
///
/// Applied to `(a, b)` it produces `(r, 0)`; `c² + |s|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Givens {
    pub c: f64,
    pub s: C64,
}

impl Givens {
    pub const IDENTITY: Givens = Givens {
        c: 1.0,
        s: C64 { re: 0.0, im: 0.0 },
    };

    /// Rotation annihilating `b` against `a`; returns the rotation and `r`.
    pub fn new(a: C64, b: C64) -> (Givens, C64) {
        let (abs_a, abs_b) = (a.norm(), b.norm());
        if abs_b == 0.0 {
            return (Self::IDENTITY, a);
        }
        if abs_a == 0.0 {
            return (
                Givens {
                    c: 0.0,
                    s: b.conj() / abs_b,
                },
                C64::new(abs_b, 0.0),
            );
        }
        let norm = abs_a.hypot(abs_b);
        let phase = a / abs_a;
        (
            Givens {
                c: abs_a / norm,
                s: phase * b.conj() / norm,
            },
            phase * norm,
        )
    }

    #[inline]
    pub fn apply(&self, x: C64, y: C64) -> (C64, C64) {
        (self.c * x + self.s * y, -self.s.conj() * x + self.c * y)
    }
}

/// One column step of a Givens QR factorization of a Hessenberg (or
/// tridiagonal) matrix.
///
/// `prior[i]` acts on rows `(i, i+1)` and is applied in order; then a new
/// rotation zeroes the last entry against the one above it. Columns shorter
/// than two entries are returned unchanged with the identity rotation.
pub fn givens_qr_step(h_col: &[C64], prior: &[Givens]) -> (Vector, Givens) {
    let mut col = Vector::from_vec(h_col.to_vec());
    let n = col.len();
    for (i, g) in prior.iter().enumerate() {
        if i + 1 >= n {
            break;
        }
        let (x, y) = g.apply(col[i], col[i + 1]);
        col[i] = x;
        col[i + 1] = y;
    }
    if n < 2 {
        return (col, Givens::IDENTITY);
    }
    let (g, r) = Givens::new(col[n - 2], col[n - 1]);
    col[n - 2] = r;
    col[n - 1] = C64::new(0.0, 0.0);
    (col, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_complex_matrix, seeded_rng, Matrix, Qr};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn three_four_five() {
        let (col, g) = givens_qr_step(&[c(3.0), c(4.0)], &[]);
        assert!((g.c - 0.6).abs() < 1e-15);
        assert!((g.s - c(0.8)).norm() < 1e-15);
        assert!((col[0] - c(5.0)).norm() < 1e-15);
        assert_eq!(col[1], c(0.0));
    }

    #[test]
    fn already_triangular_gives_identity() {
        let (col, g) = givens_qr_step(&[c(1.0), c(0.0)], &[]);
        assert_eq!(g, Givens::IDENTITY);
        assert_eq!(col[0], c(1.0));
    }

    #[test]
    fn rotation_is_unitary_for_complex_input() {
        let (g, r) = Givens::new(C64::new(1.0, -2.0), C64::new(-0.5, 3.0));
        assert!((g.c * g.c + g.s.norm_sqr() - 1.0).abs() < 1e-15);
        let (x, y) = g.apply(C64::new(1.0, -2.0), C64::new(-0.5, 3.0));
        assert!((x - r).norm() < 1e-14);
        assert!(y.norm() < 1e-14);
    }

    // Dense QR oracle: factor a 4x3 upper Hessenberg matrix column by column
    // with the rotation sequence and compare |R| against Householder QR.
    #[test]
    fn hessenberg_column_with_two_prior_rotations() {
        let mut rng = seeded_rng(5);
        let mut h = random_complex_matrix(4, 3, &mut rng);
        h[(2, 0)] = c(0.0);
        h[(3, 0)] = c(0.0);
        h[(3, 1)] = c(0.0);
        let mut rotations = Vec::new();
        let mut r = Matrix::zeros(4, 3);
        for j in 0..3 {
            let (col, g) = givens_qr_step(&h.col(j)[..j + 2], &rotations);
            rotations.push(g);
            for i in 0..j + 2 {
                r[(i, j)] = col[i];
            }
        }
        // the third column had 2 prior rotations; its subdiagonal must vanish
        let col_norm = crate::linalg::norm2(h.col(2));
        assert!(r[(3, 2)].norm() <= 1e-14 * col_norm);
        let qr = Qr::new(&h);
        for j in 0..3 {
            for i in 0..=j {
                assert!((qr.r()[(i, j)].norm() - r[(i, j)].norm()).abs() < 1e-12);
            }
        }
    }
}
