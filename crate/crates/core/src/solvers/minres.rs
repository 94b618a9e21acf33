use super::{check_lengths, require_hermitian, residual, solve_with, Kernel, SolveConfig, SolveReport, Step};
use crate::error::Result;
use crate::linalg::{dotc, norm2, Givens, Matrix, Vector, C64};
use crate::operator::LinearOperator;

/// MINRES: three-term Lanczos with a Givens QR of the tridiagonal matrix.
pub(crate) struct MinresKernel<'a> {
    op: &'a dyn LinearOperator,
    x: Vector,
    v_prev: Vector,
    v: Vector,
    beta: f64,
    g_prev2: Givens,
    g_prev: Givens,
    d_prev2: Vector,
    d_prev: Vector,
    phi_bar: C64,
    vanish: f64,
    basis: Option<Vec<Vector>>,
    reorth: bool,
    last_update: Option<(C64, Vector)>,
    done: bool,
}

impl<'a> MinresKernel<'a> {
    pub fn new(op: &'a dyn LinearOperator, b: &[C64], x0: &[C64], cfg: &SolveConfig) -> Self {
        let n = op.dim();
        let r0 = residual(op, b, x0);
        let beta1 = norm2(&r0);
        let v = if beta1 > 0.0 {
            r0.scaled(C64::new(1.0 / beta1, 0.0))
        } else {
            r0
        };
        let keep = cfg.reorthogonalize || cfg.measure_orthogonality;
        Self {
            op,
            x: Vector::from_vec(x0.to_vec()),
            v_prev: Vector::zeros(n),
            v: v.clone(),
            beta: 0.0,
            g_prev2: Givens::IDENTITY,
            g_prev: Givens::IDENTITY,
            d_prev2: Vector::zeros(n),
            d_prev: Vector::zeros(n),
            phi_bar: C64::new(beta1, 0.0),
            vanish: cfg.breakdown_threshold * op.norm_estimate(),
            basis: keep.then(|| vec![v]),
            reorth: cfg.reorthogonalize,
            last_update: None,
            done: beta1 == 0.0,
        }
    }

    fn reorthogonalize(&self, w: &mut Vector) {
        if let Some(basis) = &self.basis {
            for q in basis {
                let h = dotc(q, w);
                w.axpy(-h, q);
            }
        }
    }
}

impl Kernel for MinresKernel<'_> {
    fn step(&mut self) -> Result<Step> {
        self.last_update = None;
        if self.done {
            return Ok(Step::Exhausted { updated: false });
        }
        let mut w = self.op.apply(&self.v);
        w.axpy(C64::new(-self.beta, 0.0), &self.v_prev);
        let alpha = dotc(&self.v, &w).re;
        w.axpy(C64::new(-alpha, 0.0), &self.v);
        if self.reorth {
            self.reorthogonalize(&mut w);
        }
        let beta_next = norm2(&w);

        let (eps, delta_p) = self.g_prev2.apply(C64::new(0.0, 0.0), C64::new(self.beta, 0.0));
        let (delta, gamma_bar) = self.g_prev.apply(delta_p, C64::new(alpha, 0.0));
        let (g, gamma) = Givens::new(gamma_bar, C64::new(beta_next, 0.0));

        let vanished = beta_next <= self.vanish;
        if gamma.norm() <= self.vanish {
            self.done = true;
            return Ok(Step::Exhausted { updated: false });
        }

        let (tau, phi_bar) = g.apply(self.phi_bar, C64::new(0.0, 0.0));
        self.phi_bar = phi_bar;
        let mut d = self.v.clone();
        d.axpy(-delta, &self.d_prev);
        d.axpy(-eps, &self.d_prev2);
        let d = d.scaled(gamma.inv());
        self.x.axpy(tau, &d);

        self.d_prev2 = std::mem::replace(&mut self.d_prev, d.clone());
        self.last_update = Some((tau, d));
        self.g_prev2 = self.g_prev;
        self.g_prev = g;

        if vanished {
            self.done = true;
            return Ok(Step::Exhausted { updated: true });
        }
        let v_next = w.scaled(C64::new(1.0 / beta_next, 0.0));
        if let Some(basis) = &mut self.basis {
            basis.push(v_next.clone());
        }
        self.v_prev = std::mem::replace(&mut self.v, v_next);
        self.beta = beta_next;
        Ok(Step::Advanced)
    }

    fn solution(&self) -> Vector {
        self.x.clone()
    }

    fn residual_estimate(&self) -> f64 {
        self.phi_bar.norm()
    }

    fn orthogonality_drift(&self) -> Option<f64> {
        self.basis.as_ref().map(|b| gram_defect(b))
    }

    fn last_update(&self) -> Option<(C64, &Vector)> {
        self.last_update.as_ref().map(|(t, d)| (*t, d))
    }
}

/// `‖VᴴV − I‖₂` of a stored basis.
pub(crate) fn gram_defect(basis: &[Vector]) -> f64 {
    if basis.is_empty() {
        return 0.0;
    }
    let v = Matrix::from_columns(basis);
    v.adjoint_matmul(&v)
        .sub(&Matrix::identity(basis.len()))
        .norm_2()
}

/// MINRES for Hermitian operators, singular ones included.
///
/// A vanishing Lanczos vector with the residual above tolerance is reported
/// as `Breakdown`; with the residual below tolerance as `Converged`.
pub fn minres_solve(
    op: &dyn LinearOperator,
    b: &[C64],
    x0: &[C64],
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    check_lengths(op, b, x0)?;
    require_hermitian(op)?;
    let kernel = MinresKernel::new(op, b, x0, cfg);
    solve_with(op, b, x0, cfg, kernel)
}
