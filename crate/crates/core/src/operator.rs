//! Matrix-free linear operators: a dense matrix and the three deflated
//! compositions `P_A A`, `P_A A P_A` and `P_I A`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dotc, norm2, seeded_rng, Matrix, Vector, C64};
use crate::projection::{Deflator, GalerkinMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Hermitian,
    NonHermitian,
    Unknown,
}

/// A square linear map `C^N → C^N`.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[C64]) -> Vector;

    fn symmetry(&self) -> Symmetry;

    /// Cheap upper bound on `‖op‖₂`, used to scale tolerances.
    fn norm_estimate(&self) -> f64;
}

/// Hermitian probe defect tolerance, relative to `‖x‖ ‖y‖ ‖op‖`.
pub const HERMITIAN_PROBE_TOL: f64 = 1e-12;

/// Largest relative violation of `⟨op x, y⟩ = ⟨x, op y⟩` over seeded probes.
pub fn hermitian_probe(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut rng = seeded_rng(seed);
    let mut sample = || -> Vector {
        (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect()
    };
    let scale = op.norm_estimate().max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for _ in 0..probes {
        let x = sample();
        let y = sample();
        let lhs = dotc(&op.apply(&x), &y);
        let rhs = dotc(&x, &op.apply(&y));
        worst = worst.max((lhs - rhs).norm() / (norm2(&x) * norm2(&y) * scale));
    }
    worst
}

#[derive(Debug, Clone)]
pub struct DenseOperator {
    a: Arc<Matrix>,
    symmetry: Symmetry,
    norm: f64,
}

/// Wraps a square matrix; the Hermitian flag comes from an explicit test.
pub fn dense_operator(a: impl Into<Arc<Matrix>>) -> Result<DenseOperator> {
    let a: Arc<Matrix> = a.into();
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let symmetry = if a.is_hermitian(1e-12) {
        Symmetry::Hermitian
    } else {
        Symmetry::NonHermitian
    };
    let norm = a.frobenius_norm();
    Ok(DenseOperator { a, symmetry, norm })
}

impl DenseOperator {
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn apply(&self, x: &[C64]) -> Vector {
        self.a.matvec(x)
    }

    fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    fn norm_estimate(&self) -> f64 {
        self.norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// `P_A A` (operator mode)
    ProjectedLeft,
    /// `P_A A P_A` (operator mode); Hermitian when `A` is
    ProjectedBoth,
    /// `P_I A` (identity mode)
    IdentityProjected,
}

#[derive(Debug, Clone, Copy)]
pub struct DeflatedOperator<'d> {
    deflator: &'d Deflator,
    composition: Composition,
    symmetry: Symmetry,
    norm: f64,
}

/// Composes a projection with `A` without forming the product.
pub fn composed_deflated_operator(
    deflator: &Deflator,
    composition: Composition,
) -> Result<DeflatedOperator<'_>> {
    let (mode, symmetry) = match composition {
        Composition::ProjectedLeft => (
            GalerkinMode::Operator,
            if deflator.a_is_hermitian() {
                Symmetry::Unknown
            } else {
                Symmetry::NonHermitian
            },
        ),
        Composition::ProjectedBoth => (
            GalerkinMode::Operator,
            if deflator.a_is_hermitian() {
                Symmetry::Hermitian
            } else {
                Symmetry::NonHermitian
            },
        ),
        Composition::IdentityProjected => (
            GalerkinMode::Identity,
            if deflator.a_is_hermitian() {
                Symmetry::Hermitian
            } else {
                Symmetry::NonHermitian
            },
        ),
    };
    if deflator.mode() != mode {
        return Err(Error::ModeMismatch {
            expected: match mode {
                GalerkinMode::Identity => "B=I",
                GalerkinMode::Operator => "B=A",
            },
        });
    }
    let p = deflator.projection_norm_bound();
    let norm = match composition {
        Composition::ProjectedBoth => p * p,
        _ => p,
    } * deflator.a_norm_frobenius();
    let op = DeflatedOperator {
        deflator,
        composition,
        symmetry,
        norm,
    };
    if symmetry == Symmetry::Hermitian {
        let violation = hermitian_probe(&op, 3, 0x5eed);
        if violation > HERMITIAN_PROBE_TOL {
            return Err(Error::HermitianProbeFailed { violation });
        }
    }
    Ok(op)
}

impl DeflatedOperator<'_> {
    pub fn composition(&self) -> Composition {
        self.composition
    }

    pub fn deflator(&self) -> &Deflator {
        self.deflator
    }
}

impl LinearOperator for DeflatedOperator<'_> {
    fn dim(&self) -> usize {
        self.deflator.dim()
    }

    fn apply(&self, x: &[C64]) -> Vector {
        let d = self.deflator;
        match self.composition {
            Composition::ProjectedLeft | Composition::IdentityProjected => {
                d.apply_p(&d.apply_a(x))
            }
            Composition::ProjectedBoth => d.apply_p(&d.apply_a(&d.apply_p(x))),
        }
    }

    fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    fn norm_estimate(&self) -> f64 {
        self.norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_complex_matrix, re};

    #[test]
    fn identity_and_exchange() {
        let id = dense_operator(Matrix::identity(3)).unwrap();
        let v = Vector::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(id.apply(&v).as_slice(), v.as_slice());
        let ex = dense_operator(Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(ex.apply(&[re(1.0), re(0.0)]).as_slice(), &[re(0.0), re(1.0)]);
        assert_eq!(ex.symmetry(), Symmetry::Hermitian);
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            dense_operator(Matrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn dense_matches_triple_loop() {
        let mut rng = seeded_rng(11);
        let a = random_complex_matrix(9, 9, &mut rng);
        let v = random_complex_matrix(9, 1, &mut rng).column(0);
        let op = dense_operator(a.clone()).unwrap();
        let got = op.apply(&v);
        for i in 0..9 {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..9 {
                s += a[(i, j)] * v[j];
            }
            assert!((got[i] - s).norm() < 1e-13);
        }
        assert_eq!(op.symmetry(), Symmetry::NonHermitian);
    }

    #[test]
    fn toy_projected_left() {
        let a = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let u = Matrix::from_real_rows(&[&[1.0], &[0.0]]);
        let d = Deflator::new(a, u, GalerkinMode::Operator).unwrap();
        let op = composed_deflated_operator(&d, Composition::ProjectedLeft).unwrap();
        assert_eq!(op.apply(&[re(1.0), re(0.0)]).norm(), 0.0);
        assert_eq!(op.apply(&[re(0.0), re(1.0)]).as_slice(), &[re(1.0), re(0.0)]);
        assert!(matches!(
            composed_deflated_operator(&d, Composition::IdentityProjected),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn projected_both_is_hermitian_projected_left_is_not() {
        let mut rng = seeded_rng(12);
        let g = random_complex_matrix(15, 15, &mut rng);
        let a = g.add(&g.adjoint());
        let u = random_complex_matrix(15, 3, &mut rng);
        let d = Deflator::new(a, u, GalerkinMode::Operator).unwrap();
        let both = composed_deflated_operator(&d, Composition::ProjectedBoth).unwrap();
        assert_eq!(both.symmetry(), Symmetry::Hermitian);
        let left = composed_deflated_operator(&d, Composition::ProjectedLeft).unwrap();
        assert!(hermitian_probe(&left, 3, 1) > 1e-6);
    }
}
