use super::minres::gram_defect;
use super::{check_lengths, residual, solve_with, Kernel, SolveConfig, SolveReport, Step};
use crate::error::Result;
use crate::linalg::{dotc, givens_qr_step, norm2, Givens, Vector, C64};
use crate::operator::LinearOperator;

/// Full (unrestarted) GMRES: modified Gram-Schmidt Arnoldi with the
/// Hessenberg least-squares problem kept in triangular form by Givens
/// rotations.
pub(crate) struct GmresKernel<'a> {
    op: &'a dyn LinearOperator,
    x0: Vector,
    basis: Vec<Vector>,
    /// Columns of the triangular factor `R`, column `j` has `j + 1` entries.
    r_cols: Vec<Vector>,
    rotations: Vec<Givens>,
    /// Rotated right-hand side `β e₁`.
    g: Vec<C64>,
    vanish: f64,
    measure: bool,
    done: bool,
}

impl<'a> GmresKernel<'a> {
    pub fn new(op: &'a dyn LinearOperator, b: &[C64], x0: &[C64], cfg: &SolveConfig) -> Self {
        let r0 = residual(op, b, x0);
        let beta = norm2(&r0);
        let v = if beta > 0.0 {
            r0.scaled(C64::new(1.0 / beta, 0.0))
        } else {
            r0
        };
        Self {
            op,
            x0: Vector::from_vec(x0.to_vec()),
            basis: vec![v],
            r_cols: Vec::new(),
            rotations: Vec::new(),
            g: vec![C64::new(beta, 0.0)],
            vanish: cfg.breakdown_threshold * op.norm_estimate(),
            measure: cfg.measure_orthogonality,
            done: beta == 0.0,
        }
    }

    fn coefficients(&self) -> Vec<C64> {
        let k = self.r_cols.len();
        let mut y = vec![C64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            let mut s = self.g[i];
            for (j, yj) in y.iter().enumerate().take(k).skip(i + 1) {
                s -= self.r_cols[j][i] * yj;
            }
            y[i] = s / self.r_cols[i][i];
        }
        y
    }
}

impl Kernel for GmresKernel<'_> {
    fn step(&mut self) -> Result<Step> {
        if self.done {
            return Ok(Step::Exhausted { updated: false });
        }
        let k = self.r_cols.len();
        let mut w = self.op.apply(&self.basis[k]);
        let mut h = Vec::with_capacity(k + 2);
        for q in &self.basis {
            let hij = dotc(q, &w);
            w.axpy(-hij, q);
            h.push(hij);
        }
        let h_next = norm2(&w);
        h.push(C64::new(h_next, 0.0));

        let (col, g) = givens_qr_step(&h, &self.rotations);
        let vanished = h_next <= self.vanish;
        if col[k].norm() <= self.vanish {
            self.done = true;
            return Ok(Step::Exhausted { updated: false });
        }
        let (top, bottom) = g.apply(self.g[k], C64::new(0.0, 0.0));
        self.g[k] = top;
        self.g.push(bottom);
        self.rotations.push(g);
        self.r_cols.push(Vector::from_vec(col[..=k].to_vec()));

        if vanished {
            self.done = true;
            return Ok(Step::Exhausted { updated: true });
        }
        self.basis.push(w.scaled(C64::new(1.0 / h_next, 0.0)));
        Ok(Step::Advanced)
    }

    fn solution(&self) -> Vector {
        let mut x = self.x0.clone();
        for (yj, q) in self.coefficients().iter().zip(&self.basis) {
            x.axpy(*yj, q);
        }
        x
    }

    fn residual_estimate(&self) -> f64 {
        self.g.last().map_or(0.0, |z| z.norm())
    }

    fn orthogonality_drift(&self) -> Option<f64> {
        self.measure.then(|| gram_defect(&self.basis))
    }
}

/// Full GMRES for arbitrary square operators.
pub fn gmres_solve(
    op: &dyn LinearOperator,
    b: &[C64],
    x0: &[C64],
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    check_lengths(op, b, x0)?;
    let kernel = GmresKernel::new(op, b, x0, cfg);
    solve_with(op, b, x0, cfg, kernel)
}
