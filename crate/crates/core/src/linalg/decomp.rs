use super::{dotc, norm2, Matrix, Vector, C64};
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Thin Householder QR `A = Q R` of a tall matrix, normalized so that the
/// diagonal of `R` is real and nonnegative.
#[derive(Debug, Clone)]
pub struct Qr {
    q: Matrix,
    r: Matrix,
}

impl Qr {
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        assert!(m >= n, "QR needs rows >= cols");
        let mut work = a.clone();
        let mut reflectors: Vec<Vector> = Vec::with_capacity(n);
        for k in 0..n {
            let x = &work.col(k)[k..];
            let xnorm = norm2(x);
            let mut v = Vector::from_vec(x.to_vec());
            if xnorm == 0.0 {
                reflectors.push(Vector::zeros(m - k));
                continue;
            }
            let phase = if x[0].norm() == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                x[0] / x[0].norm()
            };
            let alpha = -phase * xnorm;
            v[0] -= alpha;
            let vnorm = v.norm();
            if vnorm == 0.0 {
                reflectors.push(Vector::zeros(m - k));
                continue;
            }
            for z in v.iter_mut() {
                *z /= vnorm;
            }
            for j in k..n {
                let col = &mut work.col_mut(j)[k..];
                let t = dotc(&v, col) * 2.0;
                for (ci, vi) in col.iter_mut().zip(v.iter()) {
                    *ci -= t * vi;
                }
            }
            reflectors.push(v);
        }

        let mut r = Matrix::from_fn(n, n, |i, j| if i <= j { work[(i, j)] } else { ZERO });
        let mut q = Matrix::from_fn(m, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { ZERO });
        for k in (0..n).rev() {
            let v = &reflectors[k];
            for j in 0..n {
                let col = &mut q.col_mut(j)[k..];
                let t = dotc(v, col) * 2.0;
                for (ci, vi) in col.iter_mut().zip(v.iter()) {
                    *ci -= t * vi;
                }
            }
        }
        // make diag(R) real and nonnegative
        for i in 0..n {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                let phase = d / d.norm();
                for j in i + 1..n {
                    r[(i, j)] *= phase.conj();
                }
                r[(i, i)] = C64::new(d.norm(), 0.0);
                for z in q.col_mut(i) {
                    *z *= phase;
                }
            }
        }
        Self { q, r }
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn into_parts(self) -> (Matrix, Matrix) {
        (self.q, self.r)
    }

    /// Ratio of the smallest to the largest diagonal entry of `R`.
    pub fn diagonal_ratio(&self) -> f64 {
        let n = self.r.cols();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = self.r[(i, i)].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    /// Solve `R x = b` by back substitution.
    pub fn solve_r(&self, b: &[C64]) -> Vector {
        back_substitute(&self.r, b)
    }
}

fn back_substitute(r: &Matrix, b: &[C64]) -> Vector {
    let n = r.cols();
    let mut x = Vector::from_vec(b.to_vec());
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    min_pivot: f64,
}

impl Lu {
    /// Factor `a`; fails with [`Error::SingularSystem`] when a pivot falls
    /// below `threshold` in magnitude.
    pub fn new(a: &Matrix, threshold: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            min_pivot = min_pivot.min(pmag);
            if pmag < threshold || pmag == 0.0 {
                return Err(Error::SingularSystem {
                    pivot: pmag,
                    threshold,
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == ZERO {
                    continue;
                }
                for i in k + 1..n {
                    let lik = lu[(i, k)];
                    lu[(i, j)] -= lik * ukj;
                }
            }
        }
        Ok(Self { lu, perm, min_pivot })
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vector {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x: Vector = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        back_substitute(&self.lu, &x)
    }

    /// Solve `Aᴴ x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vector {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        // Uᴴ y = b
        let mut y = Vector::from_vec(b.to_vec());
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s / self.lu[(i, i)].conj();
        }
        // Lᴴ z = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s;
        }
        let mut x = Vector::zeros(n);
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}

/// Cholesky factorization `A = L Lᴴ` of a Hermitian positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
    min_pivot: f64,
}

impl Cholesky {
    /// Factor `a`. A pivot (diagonal of the Schur complement) below
    /// `threshold` yields [`Error::SingularSystem`]; a clearly negative one
    /// yields [`Error::NotPositiveDefinite`].
    pub fn new(a: &Matrix, threshold: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        let mut min_pivot = f64::INFINITY;
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            min_pivot = min_pivot.min(d);
            if d < -threshold.max(f64::MIN_POSITIVE) {
                return Err(Error::NotPositiveDefinite);
            }
            if d <= threshold || d == 0.0 {
                return Err(Error::SingularSystem {
                    pivot: d,
                    threshold,
                });
            }
            let ljj = d.sqrt();
            l[(j, j)] = C64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l, min_pivot })
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn solve(&self, b: &[C64]) -> Vector {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let mut y = Vector::from_vec(b.to_vec());
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.l[(i, j)] * y[j];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.l[(j, i)].conj() * y[j];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }
}

/// Solve a small dense system by pivoted LU.
///
/// Reports [`Error::SingularSystem`] when the smallest pivot drops below
/// `1e-14 * ‖a‖₂`.
pub fn solve_small_dense(a: &Matrix, b: &[C64]) -> Result<Vector> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    let threshold = 1e-14 * a.norm_2();
    Ok(Lu::new(a, threshold)?.solve(b))
}
