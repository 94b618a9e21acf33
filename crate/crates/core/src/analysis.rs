//! Breakdown predicates, breakdown-guess construction, principal angles and
//! spectral checks of deflated operators. These are dense analysis tools
//! for desk-scale problems.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, Lu, Matrix, Qr, Svd, Vector, C64};
use crate::projection::{Deflator, GalerkinMode};

/// Singular values of `Q_AUᴴ Q_U` below this flag `𝒰 ∩ (A𝒰)^⊥ ≠ {0}`.
pub const INTERSECTION_THRESHOLD: f64 = 1e-10;

/// Invariance residual `‖A Q − Q (Qᴴ A Q)‖₂ / ‖A‖₂` accepted as exact.
pub const INVARIANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownDiagnosis {
    pub intersection_nontrivial: bool,
    /// Smallest singular value of `Q_AUᴴ Q_U`, the cosine of the largest
    /// principal angle between `𝒰` and `A𝒰`.
    pub smallest_singular_value: f64,
    pub largest_principal_angle_rad: f64,
    /// Coefficients `c` with `U c ∈ 𝒰 ∩ (A𝒰)^⊥`, when the intersection is
    /// nontrivial.
    pub intersection_coefficients: Option<Vector>,
}

impl BreakdownDiagnosis {
    pub fn largest_principal_angle_deg(&self) -> f64 {
        self.largest_principal_angle_rad.to_degrees()
    }
}

fn orthonormal_basis(m: &Matrix) -> Result<Qr> {
    let qr = Qr::new(m);
    if qr.diagonal_ratio() < 1e-12 {
        return Err(Error::RankDeficient);
    }
    Ok(qr)
}

/// Angle from its cosine `c` and sine `s`, taking whichever is better
/// conditioned.
fn angle(c: f64, s: f64) -> f64 {
    if s < std::f64::consts::FRAC_1_SQRT_2 {
        s.clamp(0.0, 1.0).asin()
    } else {
        c.clamp(0.0, 1.0).acos()
    }
}

/// Principal angles between `im X` and `im Y`, ascending, in radians.
pub fn principal_angles(x: &Matrix, y: &Matrix) -> Result<Vec<f64>> {
    if x.rows() != y.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: y.rows(),
        });
    }
    let qx = orthonormal_basis(x)?.into_parts().0;
    let qy = orthonormal_basis(y)?.into_parts().0;
    let cos = Svd::new(&qy.adjoint_matmul(&qx)).singular_values;
    // sines of the angles from the component of Qx outside im Y
    let outside = qx.sub(&qy.matmul(&qy.adjoint_matmul(&qx)));
    let mut sin = Svd::new(&outside).singular_values;
    sin.reverse();
    let p = cos.len().min(sin.len());
    Ok((0..p).map(|i| angle(cos[i], sin[i])).collect())
}

/// Tests `𝒰 ∩ (A𝒰)^⊥ ≠ {0}`, the condition under which minimal residual
/// methods on `P_A A x̂ = P_A b` can break down.
pub fn breakdown_condition(a: &Matrix, u: &Matrix) -> Result<BreakdownDiagnosis> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if u.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: u.rows(),
        });
    }
    let qr_u = orthonormal_basis(u)?;
    let q_u = qr_u.q().clone();
    let q_au = orthonormal_basis(&a.matmul(u))?.into_parts().0;
    let coupling = q_au.adjoint_matmul(&q_u);
    let svd = Svd::new(&coupling);
    let k = u.cols();
    let sigma_min = svd.singular_values[k - 1];
    let outside = q_u.sub(&q_au.matmul(&coupling));
    let sin_max = Svd::new(&outside).singular_values[0];
    let nontrivial = sigma_min < INTERSECTION_THRESHOLD;
    let coefficients = nontrivial.then(|| qr_u.solve_r(svd.v.col(k - 1)));
    Ok(BreakdownDiagnosis {
        intersection_nontrivial: nontrivial,
        smallest_singular_value: sigma_min,
        largest_principal_angle_rad: angle(sigma_min, sin_max),
        intersection_coefficients: coefficients,
    })
}

/// `x₀ = A⁻¹ (b − v)` with `v = U c ∈ 𝒰 ∩ (A𝒰)^⊥`; the deflated initial
/// residual is `v` and `P_A A v = 0`, so MINRES or GMRES on the deflated
/// system breaks down in the first step.
pub fn construct_breakdown_guess(
    a: &Matrix,
    b: &[C64],
    u: &Matrix,
    coefficients: &[C64],
) -> Result<Vector> {
    if coefficients.len() != u.cols() {
        return Err(Error::DimensionMismatch {
            expected: u.cols(),
            found: coefficients.len(),
        });
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    let v = u.matvec(coefficients);
    let v_norm = v.norm();
    if v_norm == 0.0 {
        return Err(Error::GuessInvalid {
            reason: "the combination U c is zero".into(),
        });
    }
    let d = Deflator::new(a.clone(), u.clone(), GalerkinMode::Operator)?;
    let off = d.apply_p(&v).sub(&v).norm() / v_norm;
    if off > INTERSECTION_THRESHOLD {
        return Err(Error::GuessInvalid {
            reason: format!("U c is not orthogonal to A U (relative defect {off:.3e})"),
        });
    }
    let image = d.apply_p(&d.apply_a(&v)).norm() / (v_norm * a.frobenius_norm());
    if image > INTERSECTION_THRESHOLD {
        return Err(Error::GuessInvalid {
            reason: format!("P_A A U c does not vanish (relative size {image:.3e})"),
        });
    }
    let lu = Lu::new(a, 0.0)?;
    Ok(lu.solve(&Vector::from_vec(b.to_vec()).sub(&v)))
}

/// Result of comparing `Λ(P_B A)` with `{0}^k ∪ (Λ(A) \ Θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCheck {
    /// Eigenvalues of the densely formed `P_B A`, ascending.
    pub computed: Vec<f64>,
    /// The predicted multiset, ascending.
    pub expected: Vec<f64>,
    pub max_mismatch: f64,
    pub tolerance: f64,
}

fn invariant_ritz_values(a: &Matrix, u: &Matrix) -> Result<(Vec<f64>, f64)> {
    let q = orthonormal_basis(u)?.into_parts().0;
    let aq = a.matmul(&q);
    let h = q.adjoint_matmul(&aq);
    let residual = aq.sub(&q.matmul(&h)).norm_2() / a.norm_2().max(f64::MIN_POSITIVE);
    if residual > INVARIANCE_TOL {
        return Err(Error::NotInvariant { residual });
    }
    Ok((hermitian_eig(&h.hermitian_part())?.eigenvalues, residual))
}

/// Removes the closest match of every `θ` from `lambda`.
fn remove_matches(mut lambda: Vec<f64>, theta: &[f64]) -> Vec<f64> {
    for t in theta {
        let (idx, _) = lambda
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| (*x - t).abs().total_cmp(&(*y - t).abs()))
            .expect("more eigenvalues than Ritz values");
        lambda.remove(idx);
    }
    lambda
}

/// Verifies `Λ(P_B A) = {0}^k ∪ (Λ(A) \ Θ)` for Hermitian `A` and a basis
/// `U` of an exactly invariant subspace, `Θ = Λ(A|𝒰)`.
pub fn deflated_spectrum_check(a: &Matrix, u: &Matrix, mode: GalerkinMode) -> Result<SpectrumCheck> {
    let defect = a.hermitian_defect();
    if defect > 1e-12 {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let (theta, _) = invariant_ritz_values(a, u)?;
    let lambda = hermitian_eig(a)?.eigenvalues;
    let norm = lambda.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let mut expected = remove_matches(lambda, &theta);
    expected.extend(std::iter::repeat(0.0).take(u.cols()));
    expected.sort_by(f64::total_cmp);

    let opts = crate::projection::DeflatorOptions {
        allow_non_hpd: true,
        ..Default::default()
    };
    let d = Deflator::with_options(a.clone(), u.clone(), mode, opts)?;
    let pa = d.dense_projected_operator();
    let computed = hermitian_eig(&pa.hermitian_part())?.eigenvalues;
    let tolerance = 1e-8 * norm;
    let asym = pa.sub(&pa.adjoint()).max_abs();
    let max_mismatch = computed
        .iter()
        .zip(&expected)
        .map(|(c, e)| (c - e).abs())
        .fold(asym, f64::max);
    let check = SpectrumCheck {
        computed,
        expected,
        max_mismatch,
        tolerance,
    };
    if max_mismatch > tolerance {
        return Err(Error::VerificationFailed {
            mismatch: max_mismatch,
            tolerance,
        });
    }
    Ok(check)
}

/// `max/min` of `Λ(A) \ Θ` for Hpd `A` and an exactly invariant `𝒰`: the
/// condition number of `P_I A` on `im P_I`.
pub fn effective_condition_number(a: &Matrix, u: &Matrix) -> Result<f64> {
    let defect = a.hermitian_defect();
    if defect > 1e-12 {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let lambda = hermitian_eig(a)?.eigenvalues;
    if lambda[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let full = lambda[lambda.len() - 1] / lambda[0];
    let (theta, _) = invariant_ritz_values(a, u)?;
    let rest = remove_matches(lambda, &theta);
    let kappa = rest[rest.len() - 1] / rest[0];
    debug_assert!(kappa <= full * (1.0 + 1e-12));
    Ok(kappa.min(full))
}

/// Eigenvalues of the Hermitian deflated operator `P_A A P_A`, ascending.
pub fn projected_spectrum(d: &Deflator) -> Result<Vec<f64>> {
    let n = d.dim();
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        let col = d.apply_p(&d.apply_a(&d.apply_p(&Vector::unit(n, j))));
        m.col_mut(j).copy_from_slice(&col);
    }
    Ok(hermitian_eig(&m.hermitian_part())?.eigenvalues)
}
