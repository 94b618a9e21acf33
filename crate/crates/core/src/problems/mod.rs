//! Deterministic test problems: the indefinite `±√j` spectrum family, its
//! eigenvector and breakdown deflation bases, basis perturbations, small
//! hand-built examples and seeded random instances.
//!
//! Indices are 0-based throughout this module.

pub mod io;

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::linalg::{random_complex_matrix, random_orthogonal, seeded_rng, Matrix, Vector, C64};

#[derive(Debug, Clone)]
pub struct TestProblem {
    pub label: String,
    pub seed: u64,
    pub a: Arc<Matrix>,
    pub b: Vector,
    pub x0: Vector,
    pub u: Option<Matrix>,
    pub known_solution: Option<Vector>,
    /// Eigenvalues of `a`, ascending.
    pub known_spectrum: Option<Vec<f64>>,
    /// Eigenvectors matching the construction order of the spectrum, when
    /// `a` was built as `W D Wᴴ`.
    pub eigenvectors: Option<Matrix>,
    /// Construction-order eigenvalues `D`, matching `eigenvectors`.
    pub eigenvalues: Option<Vec<f64>>,
}

impl TestProblem {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    fn eigen_parts(&self) -> Result<(&Matrix, &[f64])> {
        match (&self.eigenvectors, &self.eigenvalues) {
            (Some(w), Some(d)) => Ok((w, d)),
            _ => Err(Error::InvalidParameter(format!(
                "problem `{}` carries no eigenvector basis",
                self.label
            ))),
        }
    }
}

/// Random stream for right-hand sides, independent of the matrix stream.
fn rhs_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(1);
    rng
}

/// Standard normal real vector scaled to unit norm.
pub fn unit_random_vector(n: usize, rng: &mut impl Rng) -> Vector {
    let v: Vector = (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), 0.0))
        .collect();
    let norm = v.norm();
    v.scaled(C64::new(1.0 / norm, 0.0))
}

/// `W diag(d) Wᴴ`.
pub fn from_eigenpairs(w: &Matrix, d: &[f64]) -> Matrix {
    let scaled = Matrix::from_fn(w.rows(), w.cols(), |i, j| w[(i, j)] * d[j]);
    let a = scaled.matmul(&w.adjoint());
    a.hermitian_part()
}

fn sorted(d: &[f64]) -> Vec<f64> {
    let mut s = d.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn eigen_problem(label: String, seed: u64, d: Vec<f64>) -> TestProblem {
    let n = d.len();
    let w = random_orthogonal(n, seed);
    let a = from_eigenpairs(&w, &d);
    let b = unit_random_vector(n, &mut rhs_rng(seed));
    TestProblem {
        label,
        seed,
        a: Arc::new(a),
        b,
        x0: Vector::zeros(n),
        u: None,
        known_solution: None,
        known_spectrum: Some(sorted(&d)),
        eigenvectors: Some(w),
        eigenvalues: Some(d),
    }
}

/// `A = W D Wᴴ` of order `2m` with `λ_j = √j`, `λ_{m+j} = −√j`,
/// `W` a seeded random orthogonal matrix, `b` a seeded unit vector, `x₀ = 0`.
pub fn indefinite_spectrum_problem(m: usize, seed: u64) -> Result<TestProblem> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut d: Vec<f64> = (1..=m).map(|j| (j as f64).sqrt()).collect();
    d.extend((1..=m).map(|j| -(j as f64).sqrt()));
    Ok(eigen_problem(format!("indefinite_spectrum(m={m})"), seed, d))
}

/// Hpd problem with `outliers` small eigenvalues `10⁻³·j` and a cluster of
/// the remaining ones uniformly in `[1, 2]`.
pub fn clustered_hpd_problem(n: usize, outliers: usize, seed: u64) -> Result<TestProblem> {
    if outliers >= n {
        return Err(Error::InvalidParameter(format!(
            "need fewer outliers ({outliers}) than the dimension ({n})"
        )));
    }
    let mut rng = seeded_rng(seed);
    rng.set_stream(2);
    let cluster = Uniform::new_inclusive(1.0, 2.0);
    let mut d: Vec<f64> = (1..=outliers).map(|j| 1e-3 * j as f64).collect();
    d.extend((outliers..n).map(|_| rng.sample(cluster)));
    Ok(eigen_problem(format!("clustered_hpd(n={n})"), seed, d))
}

/// Columns `W[:, i]` of the eigenvector matrix; `A U = U D_U` exactly up to
/// rounding.
pub fn eigen_deflation_basis(p: &TestProblem, indices: &[usize]) -> Result<Matrix> {
    let (w, _) = p.eigen_parts()?;
    if indices.is_empty() {
        return Err(Error::InvalidParameter("empty index set".into()));
    }
    w.select_columns(indices)
}

/// `U = W₁ + W₂` with `W₁ = [w_i]`, `W₂ = [w_{m+i}]` for strictly increasing
/// `i < m − 1` (0-based), on a problem from
/// [`indefinite_spectrum_problem`]. Then `Uᴴ A U = 0`.
pub fn breakdown_deflation_basis(p: &TestProblem, indices: &[usize]) -> Result<Matrix> {
    let (w, _) = p.eigen_parts()?;
    let m = w.cols() / 2;
    if indices.is_empty() {
        return Err(Error::InvalidParameter("empty index set".into()));
    }
    if indices.windows(2).any(|s| s[0] >= s[1]) {
        return Err(Error::InvalidParameter("indices must be strictly increasing".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i + 1 >= m) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            limit: m.saturating_sub(1),
        });
    }
    let cols: Vec<Vector> = indices
        .iter()
        .map(|&i| w.column(i).add(w.col(m + i)))
        .collect();
    Ok(Matrix::from_columns(&cols))
}

/// `U + E` with a seeded complex Gaussian `E` scaled to `‖E‖₂ = eps`.
pub fn perturb_basis(u: &Matrix, eps: f64, seed: u64) -> Result<Matrix> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let mut rng = seeded_rng(seed);
    rng.set_stream(3);
    let e = random_complex_matrix(u.rows(), u.cols(), &mut rng);
    let scale = eps / e.norm_2();
    Ok(u.add(&e.scaled(C64::new(scale, 0.0))))
}

/// `A = [[0,1],[1,0]]`, `b = e₁`, `U = e₁`; the solution is `e₂`.
pub fn toy_breakdown_2x2() -> TestProblem {
    let a = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    TestProblem {
        label: "toy_breakdown_2x2".into(),
        seed: 0,
        a: Arc::new(a),
        b: Vector::from_real(&[1.0, 0.0]),
        x0: Vector::zeros(2),
        u: Some(Matrix::from_real_rows(&[&[1.0], &[0.0]])),
        known_solution: Some(Vector::from_real(&[0.0, 1.0])),
        known_spectrum: Some(vec![-1.0, 1.0]),
        eigenvectors: None,
        eigenvalues: None,
    }
}

/// `A = [[0,1,−1/α],[1,0,1/α],[0,0,1]]` with eigenvector `[0,1,α]` for the
/// eigenvalue 1, deflation vector `U = e₂` at distance `α` from it,
/// `x = [1,1,1]` and `b = A x`.
pub fn toy_near_invariant_3x3(alpha: f64) -> Result<TestProblem> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let inv = 1.0 / alpha;
    let a = Matrix::from_real_rows(&[&[0.0, 1.0, -inv], &[1.0, 0.0, inv], &[0.0, 0.0, 1.0]]);
    let x = Vector::from_real(&[1.0, 1.0, 1.0]);
    let b = a.matvec(&x);
    Ok(TestProblem {
        label: format!("toy_near_invariant_3x3(alpha={alpha:e})"),
        seed: 0,
        a: Arc::new(a),
        b,
        x0: Vector::zeros(3),
        u: Some(Matrix::from_columns(&[Vector::unit(3, 1)])),
        known_solution: Some(x),
        known_spectrum: None,
        eigenvectors: None,
        eigenvalues: None,
    })
}

/// Random Hermitian indefinite `A = W D Wᴴ` (complex unitary `W`,
/// `|λ| ∈ [0.5, 5]` with random signs), random complex `U` with `k` columns,
/// unit `b` and a random `x₀`.
pub fn random_hermitian_instance(n: usize, k: usize, seed: u64) -> Result<TestProblem> {
    if k == 0 || k >= n {
        return Err(Error::InvalidBasisSize { k, n });
    }
    let mut rng = seeded_rng(seed);
    let mag = Uniform::new_inclusive(0.5, 5.0);
    let d: Vec<f64> = (0..n)
        .map(|_| {
            let s: f64 = rng.sample(mag);
            if rng.gen::<bool>() {
                s
            } else {
                -s
            }
        })
        .collect();
    let g = random_complex_matrix(n, n, &mut rng);
    let w = crate::linalg::Qr::new(&g).into_parts().0;
    let a = from_eigenpairs(&w, &d);
    let u = random_complex_matrix(n, k, &mut rng);
    let x0 = random_complex_matrix(n, 1, &mut rng).column(0);
    let b = unit_random_vector(n, &mut rhs_rng(seed));
    Ok(TestProblem {
        label: format!("random_hermitian(n={n},k={k})"),
        seed,
        a: Arc::new(a),
        b,
        x0,
        u: Some(u),
        known_solution: None,
        known_spectrum: Some(sorted(&d)),
        eigenvectors: Some(w),
        eigenvalues: Some(d),
    })
}

/// Hermitian `A` with a `±` symmetric spectrum of order `2m` and a basis of
/// `k` columns whose first `paired` columns are `w_i + w_{m+i}` and whose
/// remaining columns are random. `paired > 0` makes `𝒰 ∩ (A𝒰)^⊥` nontrivial
/// whenever the random part does not interfere.
pub fn paired_spectrum_instance(m: usize, k: usize, paired: usize, seed: u64) -> Result<TestProblem> {
    if paired > k || k == 0 || k >= 2 * m || paired >= m {
        return Err(Error::InvalidParameter(format!(
            "invalid sizes m={m}, k={k}, paired={paired}"
        )));
    }
    let mut rng = seeded_rng(seed);
    rng.set_stream(4);
    let mag = Uniform::new_inclusive(0.5, 5.0);
    let half: Vec<f64> = (0..m).map(|_| rng.sample(mag)).collect();
    let mut d = half.clone();
    d.extend(half.iter().map(|x| -x));
    let mut p = eigen_problem(format!("paired_spectrum(m={m},k={k},paired={paired})"), seed, d);
    let w = p.eigenvectors.as_ref().expect("eigen problem");
    let mut cols: Vec<Vector> = (0..paired).map(|i| w.column(i).add(w.col(m + i))).collect();
    let extra = random_complex_matrix(2 * m, k - paired, &mut rng);
    cols.extend((0..k - paired).map(|j| extra.column(j)));
    p.u = Some(Matrix::from_columns(&cols));
    p.x0 = random_complex_matrix(2 * m, 1, &mut rng).column(0);
    Ok(p)
}

/// Hermitian `A = W D Wᴴ` and `U` spanning `k` exact eigenvectors, given in a
/// random non-orthonormal basis.
pub fn invariant_instance(n: usize, k: usize, seed: u64) -> Result<TestProblem> {
    let mut p = random_hermitian_instance(n, k, seed)?;
    let mut rng = seeded_rng(seed);
    rng.set_stream(5);
    let w = p.eigenvectors.as_ref().expect("eigen problem");
    let idx: Vec<usize> = (0..k).collect();
    let g = random_complex_matrix(k, k, &mut rng);
    p.u = Some(w.select_columns(&idx)?.matmul(&g));
    Ok(p)
}
