//! Seeded invariant suites behind `dkrylov check`.

use deflated_krylov::analysis::{
    breakdown_condition, construct_breakdown_guess, deflated_spectrum_check, SpectrumCheck,
};
use deflated_krylov::deflated::{
    deflated_gmres, deflated_minres_adapted_x0, deflated_minres_breakdown_free, initial_residual_norm,
    rminres_deflation_only, rminres_explicit, DualReport,
};
use deflated_krylov::linalg::{random_complex_matrix, seeded_rng, Matrix};
use deflated_krylov::problems::{
    eigen_deflation_basis, indefinite_spectrum_problem, invariant_instance, paired_spectrum_instance,
    random_hermitian_instance, TestProblem,
};
use deflated_krylov::projection::{Deflator, GalerkinMode};
use deflated_krylov::solvers::{SolveConfig, Status};
use deflated_krylov::Error;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Projections,
    Equivalence,
    Spectrum,
    Breakdown,
}

#[derive(Debug, Serialize)]
pub struct InvariantResult {
    pub name: &'static str,
    pub instances: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub seed: u64,
    pub invariants: Vec<InvariantResult>,
    pub passed: bool,
}

struct Tracker {
    name: &'static str,
    instances: usize,
    worst: f64,
    tolerance: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, instances: 0, worst: 0.0, tolerance }
    }

    fn observe(&mut self, violation: f64) {
        self.instances += 1;
        // NaN counts as a failure
        self.worst = if violation.is_nan() { f64::INFINITY } else { self.worst.max(violation) };
    }

    fn finish(self) -> InvariantResult {
        InvariantResult {
            name: self.name,
            instances: self.instances,
            max_violation: self.worst,
            tolerance: self.tolerance,
            passed: self.instances > 0 && self.worst <= self.tolerance,
        }
    }
}

fn curve_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel(r: &DualReport, p: &TestProblem) -> Vec<f64> {
    r.relative_original(initial_residual_norm(&p.a, &p.b, &p.x0))
}

const INSTANCES: u64 = 8;

fn projections(seed: u64) -> Result<Vec<InvariantResult>, Error> {
    let mut idempotent = Tracker::new("projector idempotence", 1e-12);
    let mut kernel = Tracker::new("kernel and range identities", 1e-12);
    let mut commute = Tracker::new("P A = A Q", 1e-12);
    let mut orthogonal = Tracker::new("P_A self-adjoint", 1e-12);
    for mode in [GalerkinMode::Identity, GalerkinMode::Operator] {
        for i in 0..INSTANCES {
            let mut rng = seeded_rng(seed.wrapping_add(i));
            let n = 10 + (i as usize * 7) % 31;
            let k = 1 + i as usize % 6;
            let g = random_complex_matrix(n, n, &mut rng);
            let a = match mode {
                GalerkinMode::Identity => g.adjoint_matmul(&g).add(&Matrix::identity(n)),
                GalerkinMode::Operator => g,
            };
            let u = random_complex_matrix(n, k, &mut rng);
            let v = random_complex_matrix(n, 1, &mut rng).column(0);
            let w = random_complex_matrix(n, 1, &mut rng).column(0);
            let y = random_complex_matrix(k, 1, &mut rng).column(0);
            let d = Deflator::new(a.clone(), u.clone(), mode)?;
            let bu = match mode {
                GalerkinMode::Identity => u.clone(),
                GalerkinMode::Operator => a.matmul(&u),
            };
            let uy = u.matvec(&y);
            let scale = a.norm_2() * v.norm().max(uy.norm()) * d.projection_norm_bound();
            let pv = d.apply_p(&v);
            let qv = d.apply_q(&v);
            idempotent.observe(d.apply_p(&pv).sub(&pv).norm() / scale);
            idempotent.observe(d.apply_q(&qv).sub(&qv).norm() / scale);
            kernel.observe(d.apply_p(&a.matvec(&uy)).norm() / scale);
            kernel.observe(d.apply_q(&uy).norm() / scale);
            kernel.observe(bu.matvec_adjoint(&pv).norm() / (scale * bu.norm_2()));
            kernel.observe(bu.matvec_adjoint(&a.matvec(&qv)).norm() / (scale * bu.norm_2()));
            commute.observe(d.apply_p(&a.matvec(&v)).sub(&a.matvec(&qv)).norm() / scale);
            if mode == GalerkinMode::Operator {
                let gap = (d.apply_p(&v).dot(&w) - v.dot(&d.apply_p(&w))).norm();
                orthogonal.observe(gap / (v.norm() * w.norm()));
            }
        }
    }
    Ok([idempotent, kernel, commute, orthogonal].into_iter().map(Tracker::finish).collect())
}

fn equivalence(seed: u64) -> Result<Vec<InvariantResult>, Error> {
    let plain = SolveConfig::default();
    // Different operators only agree once the Lanczos basis stays orthogonal
    let full = SolveConfig {
        reorthogonalize: true,
        ..SolveConfig::default()
    };
    let mut explicit = Tracker::new("explicit vs deflation-only curves", 1e-8);
    let mut gmres = Tracker::new("deflated GMRES vs RMINRES curves", 1e-8);
    let mut adapted = Tracker::new("adapted guess vs breakdown-free curves", 1e-8);
    for i in 0..INSTANCES {
        let p = random_hermitian_instance(30 + 4 * i as usize, 1 + i as usize % 5, seed.wrapping_add(i))?;
        let d = Deflator::new(p.a.clone(), p.u.clone().expect("generated basis"), GalerkinMode::Operator)?;
        let e = rminres_explicit(&d, &p.b, &p.x0, &plain)?;
        let o = rminres_deflation_only(&d, &p.b, &p.x0, &plain)?;
        explicit.observe(curve_gap(&rel(&e, &p), &rel(&o, &p)));
        let ef = rminres_explicit(&d, &p.b, &p.x0, &full)?;
        let gm = deflated_gmres(&d, &p.b, &p.x0, &full)?;
        gmres.observe(curve_gap(&rel(&ef, &p), &rel(&gm, &p)));
        let bf = deflated_minres_breakdown_free(&d, &p.b, &p.x0, &full)?;
        let ad = deflated_minres_adapted_x0(&d, &p.b, &p.x0, &full)?;
        adapted.observe(curve_gap(&rel(&bf, &p), &rel(&ad, &p)));
    }
    Ok([explicit, gmres, adapted].into_iter().map(Tracker::finish).collect())
}

/// Mismatch in units of the tolerance; a failed verification is a result.
fn spectrum_violation(r: Result<SpectrumCheck, Error>) -> Result<f64, Error> {
    match r {
        Ok(c) => Ok(c.max_mismatch / c.tolerance),
        Err(Error::VerificationFailed { mismatch, tolerance }) => Ok(mismatch / tolerance),
        Err(e) => Err(e),
    }
}

fn spectrum(seed: u64) -> Result<Vec<InvariantResult>, Error> {
    let mut eigen = Tracker::new("deflated spectrum with eigenvector basis (units of 1e-8 ‖A‖₂)", 1.0);
    let mut invariant = Tracker::new("deflated spectrum with invariant basis (units of 1e-8 ‖A‖₂)", 1.0);
    for i in 0..INSTANCES {
        let s = seed.wrapping_add(i);
        let m = 5 + i as usize * 3;
        let p = indefinite_spectrum_problem(m, s)?;
        let half = 1 + i as usize % 3;
        let idx: Vec<usize> = (0..half).chain(m..m + half).collect();
        let u = eigen_deflation_basis(&p, &idx)?;
        eigen.observe(spectrum_violation(deflated_spectrum_check(&p.a, &u, GalerkinMode::Operator))?);
        let q = invariant_instance(20 + i as usize, 1 + i as usize % 4, s)?;
        let u = q.u.as_ref().expect("generated basis");
        invariant.observe(spectrum_violation(deflated_spectrum_check(&q.a, u, GalerkinMode::Operator))?);
    }
    Ok([eigen, invariant].into_iter().map(Tracker::finish).collect())
}

fn breakdown(seed: u64) -> Result<Vec<InvariantResult>, Error> {
    let cfg = SolveConfig::default();
    // violation 0 for the expected outcome, 1 otherwise
    let mut flagged = Tracker::new("flagged basis breaks down at step 1", 0.0);
    let mut survives = Tracker::new("breakdown-free variant survives the flagged guess", 0.0);
    let mut invariant = Tracker::new("invariant basis never breaks down", 0.0);
    let miss = |ok: bool| if ok { 0.0 } else { 1.0 };
    for i in 0..INSTANCES * 2 {
        let s = seed.wrapping_add(i);
        let p = paired_spectrum_instance(12, 3, 1 + i as usize % 3, s)?;
        let u = p.u.clone().expect("generated basis");
        let diag = breakdown_condition(&p.a, &u)?;
        if let Some(c) = diag.intersection_coefficients {
            let x0 = construct_breakdown_guess(&p.a, &p.b, &u, &c)?;
            let d = Deflator::new(p.a.clone(), u, GalerkinMode::Operator)?;
            let r = rminres_deflation_only(&d, &p.b, &x0, &cfg)?;
            flagged.observe(miss(r.status() == Status::Breakdown { iteration: 1 }));
            let bf = deflated_minres_breakdown_free(&d, &p.b, &x0, &cfg)?;
            survives.observe(miss(!matches!(bf.status(), Status::Breakdown { .. })));
        }
        let q = invariant_instance(20, 1 + i as usize % 4, s)?;
        let d = Deflator::new(q.a.clone(), q.u.clone().expect("generated basis"), GalerkinMode::Operator)?;
        for j in 0..5 {
            let x0 = random_complex_matrix(20, 1, &mut seeded_rng(s ^ (j + 1) << 32)).column(0);
            let r = rminres_deflation_only(&d, &q.b, &x0, &cfg)?;
            invariant.observe(miss(!matches!(r.status(), Status::Breakdown { .. })));
        }
    }
    Ok([flagged, survives, invariant].into_iter().map(Tracker::finish).collect())
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<CheckReport, Error> {
    let (name, invariants) = match suite {
        Suite::Projections => ("projections", projections(seed)?),
        Suite::Equivalence => ("equivalence", equivalence(seed)?),
        Suite::Spectrum => ("spectrum", spectrum(seed)?),
        Suite::Breakdown => ("breakdown", breakdown(seed)?),
    };
    let passed = invariants.iter().all(|i| i.passed);
    Ok(CheckReport {
        suite: name.to_string(),
        seed,
        invariants,
        passed,
    })
}
