//! Base Krylov iterations over any [`LinearOperator`].
//!
//! Every solver is a small state machine (a kernel) advanced by one shared
//! driver that records residual histories and classifies termination as
//! convergence, breakdown, stagnation or exhaustion of the iteration budget.

mod cg;
mod gmres;
mod minres;

pub use cg::cg_solve;
pub use gmres::gmres_solve;
pub use minres::minres_solve;

pub(crate) use cg::CgKernel;
pub(crate) use gmres::GmresKernel;
pub(crate) use minres::MinresKernel;

use crate::error::{Error, Result};
use crate::linalg::{norm2, Vector, C64};
use crate::operator::{hermitian_probe, LinearOperator, Symmetry, HERMITIAN_PROBE_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Relative 2-norm residual threshold.
    pub tol: f64,
    pub max_iterations: usize,
    /// Continuation vectors with norm below this (relative to the operator
    /// norm estimate) count as vanished.
    pub breakdown_threshold: f64,
    /// Keep every residual norm; otherwise only the first and last.
    pub record_history: bool,
    /// Track `‖b − A xₙ‖` explicitly instead of the recurrence estimate.
    pub explicit_residuals: bool,
    /// Full reorthogonalization of the Lanczos basis (MINRES only).
    pub reorthogonalize: bool,
    /// Keep the Krylov basis and report `‖VᴴV − I‖₂` (MINRES/GMRES).
    pub measure_orthogonality: bool,
    /// Window length of the no-progress rule; `None` disables it.
    pub stagnation_window: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 1000,
            breakdown_threshold: 1e-13,
            record_history: true,
            explicit_residuals: true,
            reorthogonalize: false,
            measure_orthogonality: false,
            stagnation_window: Some(50),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.tol) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if !positive(self.breakdown_threshold) {
            return Err(Error::InvalidParameter(format!(
                "breakdown_threshold must be positive, got {}",
                self.breakdown_threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if self.stagnation_window == Some(0) {
            return Err(Error::InvalidParameter("stagnation_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    /// The continuation vector vanished at this step without a solution.
    Breakdown { iteration: usize },
    Stagnated,
    MaxIterations,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Converged => write!(f, "converged"),
            Status::Breakdown { iteration } => write!(f, "breakdown@{iteration}"),
            Status::Stagnated => write!(f, "stagnated"),
            Status::MaxIterations => write!(f, "max_iterations"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vector,
    /// `‖rₙ‖₂` from iteration 0, absolute.
    pub residual_norms: Vec<f64>,
    /// Recurrence estimates of the same quantities.
    pub estimated_residual_norms: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    pub orthogonality_drift: Option<f64>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_norms.last().expect("history starts at iteration 0")
    }
}

/// Outcome of one kernel step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Advanced,
    /// The continuation vector vanished; `updated` tells whether the
    /// projected matrix was nonsingular so that the iterate was advanced.
    Exhausted { updated: bool },
}

pub trait Kernel {
    fn step(&mut self) -> Result<Step>;
    fn solution(&self) -> Vector;
    fn residual_estimate(&self) -> f64;
    fn orthogonality_drift(&self) -> Option<f64> {
        None
    }
    /// Step length and direction of the latest update `x += τ d`, for
    /// solvers that expose one.
    fn last_update(&self) -> Option<(C64, &Vector)> {
        None
    }
}

/// Residual norms observed after a step.
#[derive(Debug, Clone, Copy)]
pub struct Observed {
    /// Residual of the system actually iterated.
    pub deflated: f64,
    /// Residual of the original system; drives termination.
    pub original: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub deflated: Vec<f64>,
    pub original: Vec<f64>,
    pub estimates: Vec<f64>,
    pub status: Status,
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.original.len() - 1
    }
}

/// Stagnation factor over one window: less than a `10^(1/50)` improvement.
pub const STAGNATION_FACTOR: f64 = 1.047_128_548_050_899_5;

fn stagnated(best: &[f64], window: usize) -> bool {
    let n = best.len();
    if n <= window {
        return false;
    }
    let (old, new) = (best[n - 1 - window], best[n - 1]);
    new > 0.0 && old / new < STAGNATION_FACTOR
}

pub(crate) fn drive<K: Kernel>(
    kernel: &mut K,
    cfg: &SolveConfig,
    reference: f64,
    mut observe: impl FnMut(&K) -> Observed,
) -> Result<Trajectory> {
    cfg.validate()?;
    let threshold = cfg.tol * reference;
    let mut t = Trajectory {
        deflated: Vec::new(),
        original: Vec::new(),
        estimates: Vec::new(),
        status: Status::MaxIterations,
    };
    let mut best = Vec::new();
    let record = |t: &mut Trajectory, best: &mut Vec<f64>, o: Observed, est: f64| {
        t.deflated.push(o.deflated);
        t.original.push(o.original);
        t.estimates.push(est);
        let prev = best.last().copied().unwrap_or(f64::INFINITY);
        best.push(prev.min(o.original));
    };

    let o = observe(kernel);
    record(&mut t, &mut best, o, kernel.residual_estimate());
    if o.original <= threshold {
        t.status = Status::Converged;
        return Ok(t);
    }

    for it in 1..=cfg.max_iterations {
        match kernel.step()? {
            Step::Exhausted { updated: false } => {
                t.status = Status::Breakdown { iteration: it };
                return Ok(t);
            }
            Step::Exhausted { updated: true } => {
                let o = observe(kernel);
                record(&mut t, &mut best, o, kernel.residual_estimate());
                t.status = if o.original <= threshold {
                    Status::Converged
                } else {
                    Status::Breakdown { iteration: it }
                };
                return Ok(t);
            }
            Step::Advanced => {
                let o = observe(kernel);
                record(&mut t, &mut best, o, kernel.residual_estimate());
                if o.original <= threshold {
                    t.status = Status::Converged;
                    return Ok(t);
                }
                if !o.original.is_finite() {
                    t.status = Status::Breakdown { iteration: it };
                    return Ok(t);
                }
                if let Some(w) = cfg.stagnation_window {
                    if stagnated(&best, w) {
                        t.status = Status::Stagnated;
                        return Ok(t);
                    }
                }
            }
        }
    }
    Ok(t)
}

pub(crate) fn thin_history(v: &mut Vec<f64>) {
    if v.len() > 2 {
        let last = *v.last().unwrap();
        v.truncate(1);
        v.push(last);
    }
}

pub(crate) fn check_lengths(op: &dyn LinearOperator, b: &[C64], x0: &[C64]) -> Result<()> {
    for len in [b.len(), x0.len()] {
        if len != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                found: len,
            });
        }
    }
    Ok(())
}

pub(crate) fn require_hermitian(op: &dyn LinearOperator) -> Result<()> {
    match op.symmetry() {
        Symmetry::Hermitian => Ok(()),
        Symmetry::NonHermitian => Err(Error::NotHermitian { asymmetry: f64::NAN }),
        Symmetry::Unknown => {
            let violation = hermitian_probe(op, 3, 0x5eed);
            if violation <= HERMITIAN_PROBE_TOL {
                Ok(())
            } else {
                Err(Error::NotHermitian { asymmetry: violation })
            }
        }
    }
}

pub(crate) fn residual(op: &dyn LinearOperator, b: &[C64], x: &[C64]) -> Vector {
    Vector::from_vec(b.to_vec()).sub(&op.apply(x))
}

/// Runs a kernel on `op x = b` with the standard explicit residual monitor.
pub(crate) fn solve_with<K: Kernel>(
    op: &dyn LinearOperator,
    b: &[C64],
    x0: &[C64],
    cfg: &SolveConfig,
    mut kernel: K,
) -> Result<SolveReport> {
    let reference = norm2(&residual(op, b, x0));
    let t = drive(&mut kernel, cfg, reference, |k| {
        let r = if cfg.explicit_residuals {
            norm2(&residual(op, b, &k.solution()))
        } else {
            k.residual_estimate()
        };
        Observed {
            deflated: r,
            original: r,
        }
    })?;
    let iterations = t.iterations();
    let mut residual_norms = t.original;
    let mut estimated_residual_norms = t.estimates;
    if !cfg.record_history {
        thin_history(&mut residual_norms);
        thin_history(&mut estimated_residual_norms);
    }
    Ok(SolveReport {
        solution: kernel.solution(),
        residual_norms,
        estimated_residual_norms,
        status: t.status,
        iterations,
        orthogonality_drift: kernel.orthogonality_drift(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolveConfig::default().validate().is_ok());
        let bad = SolveConfig {
            tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolveConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn stagnation_rule() {
        let flat = vec![1.0; 60];
        assert!(stagnated(&flat, 50));
        let slow: Vec<f64> = (0..60).map(|i| 0.99_f64.powi(i)).collect();
        assert!(!stagnated(&slow, 50));
        assert!(!stagnated(&flat[..50], 50));
    }

    #[test]
    fn stagnation_factor_value() {
        assert!((STAGNATION_FACTOR - 10f64.powf(1.0 / 50.0)).abs() < 1e-15);
    }
}
