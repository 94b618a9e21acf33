use super::{check_lengths, require_hermitian, residual, solve_with, Kernel, SolveConfig, SolveReport, Step};
use crate::error::{Error, Result};
use crate::linalg::{dotc, norm2, Vector, C64};
use crate::operator::LinearOperator;

/// Curvature `pᴴAp` below `−INDEFINITE_TOL·‖A‖‖p‖²` aborts CG.
pub const INDEFINITE_TOL: f64 = 1e-12;

pub(crate) struct CgKernel<'a> {
    op: &'a dyn LinearOperator,
    x: Vector,
    r: Vector,
    p: Vector,
    rho: f64,
    scale: f64,
    vanish: f64,
}

impl<'a> CgKernel<'a> {
    pub fn new(op: &'a dyn LinearOperator, b: &[C64], x0: &[C64], cfg: &SolveConfig) -> Self {
        let r = residual(op, b, x0);
        let rho = norm2(&r).powi(2);
        Self {
            op,
            x: Vector::from_vec(x0.to_vec()),
            p: r.clone(),
            r,
            rho,
            scale: op.norm_estimate(),
            vanish: cfg.breakdown_threshold * op.norm_estimate(),
        }
    }
}

impl Kernel for CgKernel<'_> {
    fn step(&mut self) -> Result<Step> {
        let q = self.op.apply(&self.p);
        let pp = norm2(&self.p).powi(2);
        let curvature = dotc(&self.p, &q).re;
        if curvature < -INDEFINITE_TOL * self.scale * pp {
            return Err(Error::IndefiniteDetected {
                curvature: curvature / pp,
            });
        }
        if pp == 0.0 || curvature <= self.vanish * pp {
            // search direction in the kernel: no further progress possible
            return Ok(Step::Exhausted { updated: false });
        }
        let alpha = C64::new(self.rho / curvature, 0.0);
        self.x.axpy(alpha, &self.p);
        self.r.axpy(-alpha, &q);
        let rho = norm2(&self.r).powi(2);
        let beta = C64::new(rho / self.rho, 0.0);
        self.rho = rho;
        let mut p = self.r.clone();
        p.axpy(beta, &self.p);
        self.p = p;
        Ok(Step::Advanced)
    }

    fn solution(&self) -> Vector {
        self.x.clone()
    }

    fn residual_estimate(&self) -> f64 {
        self.rho.sqrt()
    }
}

/// Conjugate gradients for Hermitian positive (semi-)definite operators.
pub fn cg_solve(
    op: &dyn LinearOperator,
    b: &[C64],
    x0: &[C64],
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    check_lengths(op, b, x0)?;
    require_hermitian(op)?;
    let kernel = CgKernel::new(op, b, x0, cfg);
    solve_with(op, b, x0, cfg, kernel)
}
