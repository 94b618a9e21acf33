use super::{dotc, norm2, Matrix, Vector, C64};
use crate::error::{Error, Result};

/// Eigendecomposition `A = Q diag(λ) Qᴴ` of a Hermitian matrix, eigenvalues
/// sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

/// 2x2 unitary `G` with `Gᴴ [[app, apq], [conj(apq), aqq]] G` diagonal.
///
/// Entries are returned as `(g_pp, g_pq, g_qp, g_qq)`.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (C64, C64, C64, C64) {
    let g = apq.norm();
    let phase = apq / g;
    let zeta = (aqq - app) / (2.0 * g);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e = phase.conj();
    (C64::new(c, 0.0), C64::new(s, 0.0), -e * s, e * c)
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, g: (C64, C64, C64, C64)) {
    let (gpp, gpq, gqp, gqq) = g;
    for i in 0..m.rows() {
        let (x, y) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = x * gpp + y * gqp;
        m[(i, q)] = x * gpq + y * gqq;
    }
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, g: (C64, C64, C64, C64)) {
    let (gpp, gpq, gqp, gqq) = g;
    for j in 0..m.cols() {
        let (x, y) = (m[(p, j)], m[(q, j)]);
        m[(p, j)] = gpp.conj() * x + gqp.conj() * y;
        m[(q, j)] = gpq.conj() * x + gqq.conj() * y;
    }
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// This is an analysis oracle; it is O(N³) per sweep and never used inside
/// the iterative solvers.
pub fn hermitian_eig(a: &Matrix) -> Result<HermitianEigenDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let defect = a.hermitian_defect();
    if defect > 1e-12 {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut q = Matrix::identity(n);
    let tol = f64::EPSILON * m.frobenius_norm();

    for _sweep in 0..100 {
        if off_diagonal_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for qi in p + 1..n {
                let apq = m[(p, qi)];
                if apq.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                let g = jacobi_rotation(m[(p, p)].re, m[(qi, qi)].re, apq);
                rotate_columns(&mut m, p, qi, g);
                rotate_rows(&mut m, p, qi, g);
                m[(p, qi)] = C64::new(0.0, 0.0);
                m[(qi, p)] = C64::new(0.0, 0.0);
                m[(p, p)].im = 0.0;
                m[(qi, qi)].im = 0.0;
                rotate_columns(&mut q, p, qi, g);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = q.select_columns(&order)?;
    Ok(HermitianEigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Singular value decomposition `A = U diag(σ) Vᴴ` from one-sided Jacobi,
/// singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub u: Matrix,
    pub v: Matrix,
}

impl Svd {
    pub fn new(a: &Matrix) -> Self {
        if a.rows() < a.cols() {
            let t = Svd::new(&a.adjoint());
            return Svd {
                singular_values: t.singular_values,
                u: t.v,
                v: t.u,
            };
        }
        let n = a.cols();
        let mut w = a.clone();
        let mut v = Matrix::identity(n);
        for _sweep in 0..100 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = norm2(w.col(p)).powi(2);
                    let beta = norm2(w.col(q)).powi(2);
                    let gamma = dotc(w.col(p), w.col(q));
                    if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt()
                        || gamma.norm() <= f64::MIN_POSITIVE
                    {
                        continue;
                    }
                    rotated = true;
                    let g = jacobi_rotation(alpha, beta, gamma);
                    rotate_columns(&mut w, p, q, g);
                    rotate_columns(&mut v, p, q, g);
                }
            }
            if !rotated {
                break;
            }
        }
        let norms: Vec<f64> = (0..n).map(|j| norm2(w.col(j))).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
        let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
        let u_cols: Vec<Vector> = order
            .iter()
            .map(|&j| {
                let s = norms[j];
                let col = Vector::from_vec(w.col(j).to_vec());
                if s > 0.0 {
                    col.scaled(C64::new(1.0 / s, 0.0))
                } else {
                    col
                }
            })
            .collect();
        Svd {
            singular_values,
            u: Matrix::from_columns(&u_cols),
            v: v.select_columns(&order).expect("permutation in range"),
        }
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    Svd::new(a).singular_values
}
