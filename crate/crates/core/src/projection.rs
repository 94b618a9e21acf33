//! Deflation projections built from an augmentation basis `U`.
//!
//! For a mode `B ∈ {I, A}` the deflator provides
//!
//! ```text
//! E_B = Uᴴ Bᴴ A U
//! M_B = U E_B⁻¹ Uᴴ
//! P_B = I − A M_B Bᴴ     projection onto (B𝒰)^⊥ along A𝒰
//! Q_B = I − M_B Bᴴ A     projection onto (Aᴴ B𝒰)^⊥ along 𝒰
//! ```
//!
//! together with the correction formulas that map iterates of a deflated
//! system back to the original system. No `N x N` matrix is ever formed:
//! `W = A U`, `Z = B U` and `Y = Aᴴ Z` are cached and every projection costs
//! one `k x k` solve plus two thin products.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Lu, Matrix, Qr, Vector, C64};

/// Choice of `B` in the Galerkin condition `r_n ⊥ B S_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GalerkinMode {
    /// `B = I`, orthogonal residual (CG-type), meant for Hpd `A`.
    Identity,
    /// `B = A`, minimal residual (MINRES/GMRES-type).
    Operator,
}

impl GalerkinMode {
    fn name(self) -> &'static str {
        match self {
            GalerkinMode::Identity => "B=I",
            GalerkinMode::Operator => "B=A",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeflatorOptions {
    /// Allow `GalerkinMode::Identity` for matrices that are not Hpd. The
    /// coupling matrix must still be nonsingular.
    pub allow_non_hpd: bool,
    /// Replace `U` by an orthonormal basis of its span before use.
    pub orthonormalize: bool,
    /// In `Operator` mode apply `P_A = I − C Cᴴ` with `C` an orthonormal
    /// basis of `A𝒰` instead of the coupling-matrix formula.
    pub orthonormal_fast_path: bool,
}

/// Which deflated right-hand side to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeflatedRhs {
    /// `P_A b`
    Projected,
    /// `P_A Q_Aᴴ b`, the consistent right-hand side of the Hermitian system
    /// `P_A A P_A x = P_A Q_Aᴴ b`.
    ProjectedAdjointCorrected,
    /// `P_I b`
    IdentityProjected,
}

#[derive(Debug, Clone)]
enum CouplingFactor {
    Cholesky(Cholesky),
    Lu(Lu),
}

impl CouplingFactor {
    fn solve(&self, b: &[C64]) -> Vector {
        match self {
            CouplingFactor::Cholesky(c) => c.solve(b),
            CouplingFactor::Lu(lu) => lu.solve(b),
        }
    }

    fn solve_adjoint(&self, b: &[C64]) -> Vector {
        match self {
            CouplingFactor::Cholesky(c) => c.solve(b),
            CouplingFactor::Lu(lu) => lu.solve_adjoint(b),
        }
    }
}

/// Relative pivot threshold for the coupling matrix factorization.
pub const COUPLING_PIVOT_THRESHOLD: f64 = 1e-14;

/// The deflation apparatus for one matrix `A`, basis `U` and mode.
///
/// Immutable after construction; `A` is shared, never copied.
#[derive(Debug, Clone)]
pub struct Deflator {
    a: Arc<Matrix>,
    u: Matrix,
    mode: GalerkinMode,
    /// `A U`
    w: Matrix,
    /// `B U`
    z: Matrix,
    /// `Aᴴ B U`
    y: Matrix,
    e: Matrix,
    factor: CouplingFactor,
    /// Orthonormal basis of `A𝒰` (operator mode only).
    c: Option<Matrix>,
    fast_path: bool,
    a_hermitian: bool,
    a_norm_f: f64,
    projection_norm: f64,
}

fn thin_product(m: &Matrix, coeffs: &[C64]) -> Vector {
    m.matvec(coeffs)
}

fn is_hpd(a: &Matrix) -> bool {
    a.is_hermitian(1e-12) && Cholesky::new(&a.hermitian_part(), 0.0).is_ok()
}

impl Deflator {
    pub fn new(a: impl Into<Arc<Matrix>>, u: Matrix, mode: GalerkinMode) -> Result<Self> {
        Self::with_options(a, u, mode, DeflatorOptions::default())
    }

    pub fn with_options(
        a: impl Into<Arc<Matrix>>,
        u: Matrix,
        mode: GalerkinMode,
        options: DeflatorOptions,
    ) -> Result<Self> {
        let a: Arc<Matrix> = a.into();
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        if u.rows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: u.rows(),
            });
        }
        let k = u.cols();
        if k == 0 || k >= n {
            return Err(Error::InvalidBasisSize { k, n });
        }
        let u = if options.orthonormalize {
            let qr = Qr::new(&u);
            if qr.diagonal_ratio() < 1e-12 {
                return Err(Error::RankDeficient);
            }
            qr.into_parts().0
        } else {
            u
        };

        let a_hermitian = a.is_hermitian(1e-12);
        let a_norm_f = a.frobenius_norm();
        let u_norm_f = u.frobenius_norm();
        let w = a.matmul(&u);

        let (z, e, scale) = match mode {
            GalerkinMode::Identity => {
                let e = u.adjoint_matmul(&w);
                (u.clone(), e, a_norm_f * u_norm_f * u_norm_f)
            }
            GalerkinMode::Operator => {
                let e = w.adjoint_matmul(&w);
                (w.clone(), e, a_norm_f * a_norm_f * u_norm_f * u_norm_f)
            }
        };
        let threshold = COUPLING_PIVOT_THRESHOLD * scale;
        let singular = |err: Error| match err {
            Error::SingularSystem { pivot, threshold } => {
                Error::SingularCoupling { pivot, threshold }
            }
            other => other,
        };

        let factor = match mode {
            GalerkinMode::Operator => {
                CouplingFactor::Cholesky(Cholesky::new(&e, threshold).map_err(|err| match err {
                    // WᴴW is Hpd whenever W has full rank; any failure is rank loss
                    Error::NotPositiveDefinite => Error::SingularCoupling {
                        pivot: 0.0,
                        threshold,
                    },
                    other => singular(other),
                })?)
            }
            GalerkinMode::Identity => {
                if is_hpd(&a) {
                    CouplingFactor::Cholesky(
                        Cholesky::new(&e.hermitian_part(), threshold).map_err(singular)?,
                    )
                } else if options.allow_non_hpd {
                    CouplingFactor::Lu(Lu::new(&e, threshold).map_err(singular)?)
                } else {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        };

        let y = a.adjoint_matmul(&z);

        let c = match mode {
            GalerkinMode::Operator => Some(Qr::new(&w).into_parts().0),
            GalerkinMode::Identity => None,
        };

        // ‖W E⁻¹ Zᴴ‖ ≤ ‖W‖ ‖E⁻¹‖ ‖Z‖, used only to scale probe tolerances
        let projection_norm = match mode {
            GalerkinMode::Operator => 1.0,
            GalerkinMode::Identity => {
                let einv = Matrix::from_columns(
                    &(0..k)
                        .map(|j| factor.solve(&Vector::unit(k, j)))
                        .collect::<Vec<_>>(),
                );
                1.0 + w.frobenius_norm() * einv.frobenius_norm() * z.frobenius_norm()
            }
        };

        Ok(Self {
            a,
            u,
            mode,
            w,
            z,
            y,
            e,
            factor,
            c,
            fast_path: options.orthonormal_fast_path && mode == GalerkinMode::Operator,
            a_hermitian,
            a_norm_f,
            projection_norm,
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn shared_a(&self) -> Arc<Matrix> {
        Arc::clone(&self.a)
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    /// Cached `A U`.
    pub fn w(&self) -> &Matrix {
        &self.w
    }

    /// `E_B = Uᴴ Bᴴ A U`
    pub fn coupling(&self) -> &Matrix {
        &self.e
    }

    pub fn mode(&self) -> GalerkinMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    pub fn a_is_hermitian(&self) -> bool {
        self.a_hermitian
    }

    pub fn a_norm_frobenius(&self) -> f64 {
        self.a_norm_f
    }

    /// Upper bound on `‖P_B‖₂`, used for tolerance scaling.
    pub fn projection_norm_bound(&self) -> f64 {
        self.projection_norm
    }

    fn require(&self, mode: GalerkinMode) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected: mode.name(),
            })
        }
    }

    fn check_len(&self, v: &[C64]) {
        assert_eq!(v.len(), self.dim(), "vector length does not match deflator");
    }

    pub fn apply_a(&self, v: &[C64]) -> Vector {
        self.a.matvec(v)
    }

    /// `M_B v = U E_B⁻¹ Uᴴ v`
    pub fn apply_m(&self, v: &[C64]) -> Vector {
        self.check_len(v);
        let t = self.factor.solve(&self.u.matvec_adjoint(v));
        thin_product(&self.u, &t)
    }

    /// `M_B Bᴴ v`
    pub fn apply_m_bh(&self, v: &[C64]) -> Vector {
        self.check_len(v);
        let t = self.factor.solve(&self.z.matvec_adjoint(v));
        thin_product(&self.u, &t)
    }

    /// `P_B v = v − A M_B Bᴴ v`
    pub fn apply_p(&self, v: &[C64]) -> Vector {
        if self.fast_path {
            return self.apply_p_orthonormal(v).expect("fast path implies operator mode");
        }
        self.check_len(v);
        let t = self.factor.solve(&self.z.matvec_adjoint(v));
        let mut out = Vector::from_vec(v.to_vec());
        out.axpy(C64::new(-1.0, 0.0), &thin_product(&self.w, &t));
        out
    }

    /// `P_A v = v − C Cᴴ v` with `C` an orthonormal basis of `A𝒰`.
    pub fn apply_p_orthonormal(&self, v: &[C64]) -> Result<Vector> {
        self.require(GalerkinMode::Operator)?;
        self.check_len(v);
        let c = self.c.as_ref().expect("operator mode stores C");
        let t = c.matvec_adjoint(v);
        let mut out = Vector::from_vec(v.to_vec());
        out.axpy(C64::new(-1.0, 0.0), &c.matvec(&t));
        Ok(out)
    }

    /// `Q_B v = v − M_B Bᴴ A v`
    pub fn apply_q(&self, v: &[C64]) -> Vector {
        self.check_len(v);
        let t = self.factor.solve(&self.y.matvec_adjoint(v));
        let mut out = Vector::from_vec(v.to_vec());
        out.axpy(C64::new(-1.0, 0.0), &thin_product(&self.u, &t));
        out
    }

    /// `P_Bᴴ v`
    pub fn apply_p_adjoint(&self, v: &[C64]) -> Vector {
        self.check_len(v);
        let t = self.factor.solve_adjoint(&self.w.matvec_adjoint(v));
        let mut out = Vector::from_vec(v.to_vec());
        out.axpy(C64::new(-1.0, 0.0), &thin_product(&self.z, &t));
        out
    }

    /// `Q_Bᴴ v`
    pub fn apply_q_adjoint(&self, v: &[C64]) -> Vector {
        self.check_len(v);
        let t = self.factor.solve_adjoint(&self.u.matvec_adjoint(v));
        let mut out = Vector::from_vec(v.to_vec());
        out.axpy(C64::new(-1.0, 0.0), &thin_product(&self.y, &t));
        out
    }

    /// `Q_B x̂ + M_B Bᴴ b`: maps an iterate of the deflated system to an
    /// iterate of `A x = b` with the same residual.
    pub fn correct_solution(&self, x_hat: &[C64], b: &[C64]) -> Vector {
        self.apply_q(x_hat).add(&self.apply_m_bh(b))
    }

    /// `Q_A (P_A x̄ + A M_A b) + M_A A b` for iterates `x̄` of the Hermitian
    /// system `P_A A P_A x = P_A Q_Aᴴ b` (`A` Hermitian).
    pub fn breakdown_free_correction(&self, x_bar: &[C64], b: &[C64]) -> Result<Vector> {
        self.require(GalerkinMode::Operator)?;
        let inner = self.apply_p(x_bar).add(&self.apply_a(&self.apply_m(b)));
        Ok(self.apply_q(&inner).add(&self.apply_m(&self.apply_a(b))))
    }

    /// `P_A x₀ + A M_A b`, the initial guess that makes the deflation-only
    /// MINRES iteration coincide with MINRES on `P_A A P_A x = P_A Q_Aᴴ b`.
    pub fn adapted_initial_guess(&self, x0: &[C64], b: &[C64]) -> Result<Vector> {
        self.require(GalerkinMode::Operator)?;
        Ok(self.apply_p(x0).add(&self.apply_a(&self.apply_m(b))))
    }

    /// `x₋₁ + M_I (b − A x₋₁)`; the resulting residual is orthogonal to 𝒰.
    pub fn cg_initial_correction(&self, x_minus1: &[C64], b: &[C64]) -> Result<Vector> {
        self.require(GalerkinMode::Identity)?;
        let r = Vector::from_vec(b.to_vec()).sub(&self.apply_a(x_minus1));
        Ok(Vector::from_vec(x_minus1.to_vec()).add(&self.apply_m(&r)))
    }

    pub fn deflated_rhs(&self, b: &[C64], variant: DeflatedRhs) -> Result<Vector> {
        match variant {
            DeflatedRhs::Projected => {
                self.require(GalerkinMode::Operator)?;
                Ok(self.apply_p(b))
            }
            DeflatedRhs::ProjectedAdjointCorrected => {
                self.require(GalerkinMode::Operator)?;
                Ok(self.apply_p(&self.apply_q_adjoint(b)))
            }
            DeflatedRhs::IdentityProjected => {
                self.require(GalerkinMode::Identity)?;
                Ok(self.apply_p(b))
            }
        }
    }

    /// `Uᴴ Bᴴ v`, the quantity the projections annihilate.
    pub fn test_space_coefficients(&self, v: &[C64]) -> Vector {
        self.z.matvec_adjoint(v)
    }

    /// Dense `P_B A`, for analysis only.
    pub fn dense_projected_operator(&self) -> Matrix {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        for j in 0..n {
            let col = self.apply_p(self.a.col(j));
            out.col_mut(j).copy_from_slice(&col);
        }
        out
    }
}
