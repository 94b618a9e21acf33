//! Deflated and augmented method variants.
//!
//! Each variant iterates some system (the original one, or a projected one)
//! and maps its iterates back to `A x = b`. The returned [`DualReport`]
//! carries both trajectories. All variants start from the same user initial
//! guess `x₀`, and the original residual norms of every variant are absolute
//! values `‖b − A xₙ‖₂`; divide by `‖b − A x₀‖₂` for relative curves.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix, Vector, C64};
use crate::operator::{composed_deflated_operator, dense_operator, Composition, LinearOperator};
use crate::projection::{DeflatedRhs, Deflator, DeflatorOptions, GalerkinMode};
use crate::solvers::{
    drive, thin_history, CgKernel, GmresKernel, Kernel, MinresKernel, Observed, SolveConfig,
    SolveReport, Status,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodVariant {
    PlainCg,
    DeflatedCg,
    PlainMinres,
    RminresExplicit,
    RminresDeflationOnly,
    DeflatedMinresBreakdownFree,
    DeflatedMinresAdaptedX0,
    DeflatedGmres,
}

impl MethodVariant {
    pub const ALL: [MethodVariant; 8] = [
        MethodVariant::PlainCg,
        MethodVariant::DeflatedCg,
        MethodVariant::PlainMinres,
        MethodVariant::RminresExplicit,
        MethodVariant::RminresDeflationOnly,
        MethodVariant::DeflatedMinresBreakdownFree,
        MethodVariant::DeflatedMinresAdaptedX0,
        MethodVariant::DeflatedGmres,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodVariant::PlainCg => "plain_cg",
            MethodVariant::DeflatedCg => "deflated_cg",
            MethodVariant::PlainMinres => "plain_minres",
            MethodVariant::RminresExplicit => "rminres_explicit",
            MethodVariant::RminresDeflationOnly => "rminres_deflation_only",
            MethodVariant::DeflatedMinresBreakdownFree => "deflated_minres_breakdown_free",
            MethodVariant::DeflatedMinresAdaptedX0 => "deflated_minres_adapted_x0",
            MethodVariant::DeflatedGmres => "deflated_gmres",
        }
    }

    /// Galerkin mode of the deflator the variant needs, if any.
    pub fn required_mode(self) -> Option<GalerkinMode> {
        match self {
            MethodVariant::PlainCg | MethodVariant::PlainMinres => None,
            MethodVariant::DeflatedCg => Some(GalerkinMode::Identity),
            _ => Some(GalerkinMode::Operator),
        }
    }
}

impl fmt::Display for MethodVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method variant `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct DualReport {
    /// Report of the system actually iterated; its solution is the
    /// uncorrected iterate.
    pub deflated_report: SolveReport,
    /// `‖b − A xₙ‖₂` of the corrected iterates.
    pub original_residual_norms: Vec<f64>,
    pub corrected_iterate: Vector,
}

impl DualReport {
    pub fn status(&self) -> Status {
        self.deflated_report.status
    }

    pub fn iterations(&self) -> usize {
        self.deflated_report.iterations
    }

    pub fn relative_original(&self, reference: f64) -> Vec<f64> {
        self.original_residual_norms.iter().map(|r| r / reference).collect()
    }

    pub fn relative_deflated(&self, reference: f64) -> Vec<f64> {
        self.deflated_report
            .residual_norms
            .iter()
            .map(|r| r / reference)
            .collect()
    }
}

/// `‖b − A x₀‖₂`, the common normalization of all curves.
pub fn initial_residual_norm(a: &Matrix, b: &[C64], x0: &[C64]) -> f64 {
    norm2(&Vector::from_vec(b.to_vec()).sub(&a.matvec(x0)))
}

#[derive(Clone, Copy)]
enum Inner {
    Cg,
    Minres,
    Gmres,
}

/// One deflated solve: the system `op x̂ = rhs` (residuals measured with
/// `residual_op`) iterated from `x̂₀`, then mapped back by `correct`.
struct Setup<'s> {
    a: &'s Matrix,
    b: &'s [C64],
    residual_op: &'s dyn LinearOperator,
    iter_op: &'s dyn LinearOperator,
    rhs: Vector,
    xhat0: Vector,
    reference: f64,
    inner: Inner,
}

/// Per-iteration correction strategy.
enum Correction<'c> {
    /// Recompute `x = f(x̂)` from the current iterate.
    Map(&'c dyn Fn(&[C64]) -> Vector),
    /// Keep `x` and apply `x += τ Q d` from the MINRES update.
    Incremental { start: Vector, q: &'c Deflator },
}

fn run(setup: Setup<'_>, correction: Correction<'_>, cfg: &SolveConfig) -> Result<DualReport> {
    let Setup {
        a,
        b,
        residual_op,
        iter_op,
        rhs,
        xhat0,
        reference,
        inner,
    } = setup;
    let rhat0 = rhs.sub(&residual_op.apply(&xhat0));
    let zero = Vector::zeros(a.rows());
    let orig = |x: &[C64]| norm2(&Vector::from_vec(b.to_vec()).sub(&a.matvec(x)));
    let defl = |xhat: &[C64], estimate: f64| {
        if cfg.explicit_residuals {
            norm2(&rhs.sub(&residual_op.apply(xhat)))
        } else {
            estimate
        }
    };

    let mut incremental = match &correction {
        Correction::Incremental { start, .. } => Some(start.clone()),
        Correction::Map(_) => None,
    };
    let mut last_x = Vector::zeros(a.rows());

    fn go<K: Kernel>(
        mut kernel: K,
        cfg: &SolveConfig,
        reference: f64,
        mut observe: impl FnMut(&K) -> Observed,
    ) -> Result<(crate::solvers::Trajectory, Vector, Option<f64>)> {
        let t = drive(&mut kernel, cfg, reference, &mut observe)?;
        Ok((t, kernel.solution(), kernel.orthogonality_drift()))
    }

    let mut observe = |k: &dyn Kernel| {
        let xhat = xhat0.add(&k.solution());
        let x = match (&correction, incremental.as_mut()) {
            (Correction::Incremental { q, .. }, Some(x)) => {
                if let Some((tau, d)) = k.last_update() {
                    x.axpy(tau, &q.apply_q(d));
                }
                x.clone()
            }
            (Correction::Map(f), _) => f(&xhat),
            _ => unreachable!("incremental state exists iff requested"),
        };
        let o = Observed {
            deflated: defl(&xhat, k.residual_estimate()),
            original: orig(&x),
        };
        last_x = x;
        o
    };

    let (t, z, drift) = match inner {
        Inner::Cg => go(CgKernel::new(iter_op, &rhat0, &zero, cfg), cfg, reference, |k| observe(k))?,
        Inner::Gmres => go(GmresKernel::new(iter_op, &rhat0, &zero, cfg), cfg, reference, |k| observe(k))?,
        Inner::Minres => go(MinresKernel::new(iter_op, &rhat0, &zero, cfg), cfg, reference, |k| observe(k))?,
    };
    let solution = xhat0.add(&z);

    let iterations = t.iterations();
    let mut residual_norms = t.deflated;
    let mut estimated_residual_norms = t.estimates;
    let mut original_residual_norms = t.original;
    if !cfg.record_history {
        thin_history(&mut residual_norms);
        thin_history(&mut estimated_residual_norms);
        thin_history(&mut original_residual_norms);
    }
    Ok(DualReport {
        deflated_report: SolveReport {
            solution,
            residual_norms,
            estimated_residual_norms,
            status: t.status,
            iterations,
            orthogonality_drift: drift,
        },
        original_residual_norms,
        corrected_iterate: last_x,
    })
}

fn require_mode(d: &Deflator, mode: GalerkinMode) -> Result<()> {
    if d.mode() == mode {
        Ok(())
    } else {
        Err(Error::ModeMismatch {
            expected: match mode {
                GalerkinMode::Identity => "B=I",
                GalerkinMode::Operator => "B=A",
            },
        })
    }
}

fn require_hermitian(d: &Deflator) -> Result<()> {
    if d.a_is_hermitian() {
        Ok(())
    } else {
        Err(Error::NotHermitian {
            asymmetry: d.a().hermitian_defect(),
        })
    }
}

fn check_inputs(a: &Matrix, b: &[C64], x0: &[C64]) -> Result<()> {
    for len in [b.len(), x0.len()] {
        if len != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: len,
            });
        }
    }
    Ok(())
}

fn plain(a: &Matrix, b: &[C64], x0: &[C64], cfg: &SolveConfig, inner: Inner) -> Result<DualReport> {
    check_inputs(a, b, x0)?;
    let op = dense_operator(a.clone())?;
    if matches!(inner, Inner::Cg | Inner::Minres) {
        crate::solvers::require_hermitian(&op)?;
    }
    let identity = |x: &[C64]| Vector::from_vec(x.to_vec());
    run(
        Setup {
            a,
            b,
            residual_op: &op,
            iter_op: &op,
            rhs: Vector::from_vec(b.to_vec()),
            xhat0: Vector::from_vec(x0.to_vec()),
            reference: initial_residual_norm(a, b, x0),
            inner,
        },
        Correction::Map(&identity),
        cfg,
    )
}

/// CG on `A x = b`.
pub fn plain_cg(a: &Matrix, b: &[C64], x0: &[C64], cfg: &SolveConfig) -> Result<DualReport> {
    plain(a, b, x0, cfg, Inner::Cg)
}

/// MINRES on `A x = b`.
pub fn plain_minres(a: &Matrix, b: &[C64], x0: &[C64], cfg: &SolveConfig) -> Result<DualReport> {
    plain(a, b, x0, cfg, Inner::Minres)
}

/// Deflated CG: the initial correction `x₀ + M_I (b − A x₀)`, CG on
/// `P_I A x̂ = P_I b`, and the correction `x = Q_I x̂ + M_I b`.
pub fn deflated_cg(d: &Deflator, b: &[C64], x0: &[C64], cfg: &SolveConfig) -> Result<DualReport> {
    require_mode(d, GalerkinMode::Identity)?;
    check_inputs(d.a(), b, x0)?;
    let op = composed_deflated_operator(d, Composition::IdentityProjected)?;
    crate::solvers::require_hermitian(&op)?;
    let mb = d.apply_m_bh(b);
    let correct = |xhat: &[C64]| d.apply_q(xhat).add(&mb);
    run(
        Setup {
            a: d.a(),
            b,
            residual_op: &op,
            iter_op: &op,
            rhs: d.deflated_rhs(b, DeflatedRhs::IdentityProjected)?,
            xhat0: d.cg_initial_correction(x0, b)?,
            reference: initial_residual_norm(d.a(), b, x0),
            inner: Inner::Cg,
        },
        Correction::Map(&correct),
        cfg,
    )
}

fn deflation_only_from(
    d: &Deflator,
    b: &[C64],
    xhat0: Vector,
    reference: f64,
    cfg: &SolveConfig,
) -> Result<DualReport> {
    let literal = composed_deflated_operator(d, Composition::ProjectedLeft)?;
    let hermitian = composed_deflated_operator(d, Composition::ProjectedBoth)?;
    let mab = d.apply_m_bh(b);
    let correct = |xhat: &[C64]| d.apply_q(xhat).add(&mab);
    run(
        Setup {
            a: d.a(),
            b,
            residual_op: &literal,
            iter_op: &hermitian,
            rhs: d.deflated_rhs(b, DeflatedRhs::Projected)?,
            xhat0,
            reference,
            inner: Inner::Minres,
        },
        Correction::Map(&correct),
        cfg,
    )
}

/// Augmented MINRES with explicit augmentation: MINRES on
/// `P_A A x̂ = P_A b` whose every update is carried to the augmented
/// iterate, `xₙ = xₙ₋₁ + τₙ Q_A dₙ`, so that `xₙ = Q_A x̂ₙ + M_A Aᴴ b`.
///
/// Breaks down iff the initial guess meets `𝒰 ∩ (A𝒰)^⊥ ≠ {0}` badly.
pub fn rminres_explicit(d: &Deflator, b: &[C64], x0: &[C64], cfg: &SolveConfig) -> Result<DualReport> {
    require_mode(d, GalerkinMode::Operator)?;
    require_hermitian(d)?;
    check_inputs(d.a(), b, x0)?;
    let literal = composed_deflated_operator(d, Composition::ProjectedLeft)?;
    let hermitian = composed_deflated_operator(d, Composition::ProjectedBoth)?;
    let start = d.correct_solution(x0, b);
    run(
        Setup {
            a: d.a(),
            b,
            residual_op: &literal,
            iter_op: &hermitian,
            rhs: d.deflated_rhs(b, DeflatedRhs::Projected)?,
            xhat0: Vector::from_vec(x0.to_vec()),
            reference: initial_residual_norm(d.a(), b, x0),
            inner: Inner::Minres,
        },
        Correction::Incremental { start, q: d },
        cfg,
    )
}

/// MINRES on `P_A A x̂ = P_A b` with the correction
/// `x = Q_A x̂ + M_A Aᴴ b` applied to the iterates afterwards.
pub fn rminres_deflation_only(
    d: &Deflator,
    b: &[C64],
    x0: &[C64],
    cfg: &SolveConfig,
) -> Result<DualReport> {
    require_mode(d, GalerkinMode::Operator)?;
    require_hermitian(d)?;
    check_inputs(d.a(), b, x0)?;
    let reference = initial_residual_norm(d.a(), b, x0);
    deflation_only_from(d, b, Vector::from_vec(x0.to_vec()), reference, cfg)
}

/// MINRES on the Hermitian system `P_A A P_A x̄ = P_A Q_Aᴴ b`, which cannot
/// break down, followed by `x = Q_A (P_A x̄ + A M_A b) + M_A A b`.
pub fn deflated_minres_breakdown_free(
    d: &Deflator,
    b: &[C64],
    x0: &[C64],
    cfg: &SolveConfig,
) -> Result<DualReport> {
    require_mode(d, GalerkinMode::Operator)?;
    require_hermitian(d)?;
    check_inputs(d.a(), b, x0)?;
    let op = composed_deflated_operator(d, Composition::ProjectedBoth)?;
    let amb = d.apply_a(&d.apply_m(b));
    let mab = d.apply_m(&d.apply_a(b));
    let correct = |xbar: &[C64]| d.apply_q(&d.apply_p(xbar).add(&amb)).add(&mab);
    run(
        Setup {
            a: d.a(),
            b,
            residual_op: &op,
            iter_op: &op,
            rhs: d.deflated_rhs(b, DeflatedRhs::ProjectedAdjointCorrected)?,
            xhat0: Vector::from_vec(x0.to_vec()),
            reference: initial_residual_norm(d.a(), b, x0),
            inner: Inner::Minres,
        },
        Correction::Map(&correct),
        cfg,
    )
}

/// Deflation-only MINRES started from `x̂₀ = P_A x₀ + A M_A b`; equivalent
/// to [`deflated_minres_breakdown_free`] with the same `x₀`.
pub fn deflated_minres_adapted_x0(
    d: &Deflator,
    b: &[C64],
    x0: &[C64],
    cfg: &SolveConfig,
) -> Result<DualReport> {
    require_mode(d, GalerkinMode::Operator)?;
    require_hermitian(d)?;
    check_inputs(d.a(), b, x0)?;
    let reference = initial_residual_norm(d.a(), b, x0);
    deflation_only_from(d, b, d.adapted_initial_guess(x0, b)?, reference, cfg)
}

/// GMRES on `P_A A x̂ = P_A b` followed by `x = Q_A x̂ + M_A Aᴴ b`; any
/// nonsingular `A`.
pub fn deflated_gmres(d: &Deflator, b: &[C64], x0: &[C64], cfg: &SolveConfig) -> Result<DualReport> {
    require_mode(d, GalerkinMode::Operator)?;
    check_inputs(d.a(), b, x0)?;
    let op = composed_deflated_operator(d, Composition::ProjectedLeft)?;
    let mab = d.apply_m_bh(b);
    let correct = |xhat: &[C64]| d.apply_q(xhat).add(&mab);
    run(
        Setup {
            a: d.a(),
            b,
            residual_op: &op,
            iter_op: &op,
            rhs: d.deflated_rhs(b, DeflatedRhs::Projected)?,
            xhat0: Vector::from_vec(x0.to_vec()),
            reference: initial_residual_norm(d.a(), b, x0),
            inner: Inner::Gmres,
        },
        Correction::Map(&correct),
        cfg,
    )
}

/// Builds the deflator the variant needs and runs it.
pub fn run_variant(
    variant: MethodVariant,
    a: &Arc<Matrix>,
    b: &[C64],
    x0: &[C64],
    u: Option<&Matrix>,
    options: DeflatorOptions,
    cfg: &SolveConfig,
) -> Result<DualReport> {
    let deflator = match variant.required_mode() {
        None => None,
        Some(mode) => {
            let u = u.ok_or_else(|| {
                Error::InvalidParameter(format!("variant {variant} needs a deflation basis"))
            })?;
            Some(Deflator::with_options(Arc::clone(a), u.clone(), mode, options)?)
        }
    };
    let d = || deflator.as_ref().expect("mode checked above");
    match variant {
        MethodVariant::PlainCg => plain_cg(a, b, x0, cfg),
        MethodVariant::PlainMinres => plain_minres(a, b, x0, cfg),
        MethodVariant::DeflatedCg => deflated_cg(d(), b, x0, cfg),
        MethodVariant::RminresExplicit => rminres_explicit(d(), b, x0, cfg),
        MethodVariant::RminresDeflationOnly => rminres_deflation_only(d(), b, x0, cfg),
        MethodVariant::DeflatedMinresBreakdownFree => deflated_minres_breakdown_free(d(), b, x0, cfg),
        MethodVariant::DeflatedMinresAdaptedX0 => deflated_minres_adapted_x0(d(), b, x0, cfg),
        MethodVariant::DeflatedGmres => deflated_gmres(d(), b, x0, cfg),
    }
}
