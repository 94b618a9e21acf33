use std::sync::Arc;

use deflated_krylov::deflated::{
    deflated_cg, deflated_gmres, deflated_minres_adapted_x0, deflated_minres_breakdown_free,
    initial_residual_norm, plain_cg, rminres_deflation_only, rminres_explicit, run_variant,
    DualReport, MethodVariant,
};
use deflated_krylov::linalg::{random_complex_matrix, re, seeded_rng, Lu, Matrix, Vector, C64};
use deflated_krylov::problems::{
    breakdown_deflation_basis, indefinite_spectrum_problem, invariant_instance,
    random_hermitian_instance, TestProblem,
};
use deflated_krylov::projection::{Deflator, DeflatorOptions, GalerkinMode};
use deflated_krylov::solvers::{SolveConfig, Status};
use deflated_krylov::Error;
use proptest::prelude::*;

fn rel(r: &DualReport, p: &TestProblem, x0: &[C64]) -> Vec<f64> {
    r.relative_original(initial_residual_norm(&p.a, &p.b, x0))
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "curves of different length");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn operator_deflator(p: &TestProblem) -> Deflator {
    Deflator::new(p.a.clone(), p.u.clone().unwrap(), GalerkinMode::Operator).unwrap()
}

fn full_recurrence() -> SolveConfig {
    SolveConfig {
        reorthogonalize: true,
        ..Default::default()
    }
}

#[test]
fn minimal_residual_variants_coincide() {
    let cfg = full_recurrence();
    for seed in 0..10u64 {
        let n = 40 + 6 * seed as usize;
        let k = 1 + seed as usize;
        let p = random_hermitian_instance(n, k, 700 + seed).unwrap();
        let d = operator_deflator(&p);
        let e = rminres_explicit(&d, &p.b, &p.x0, &cfg).unwrap();
        let o = rminres_deflation_only(&d, &p.b, &p.x0, &cfg).unwrap();
        let g = deflated_gmres(&d, &p.b, &p.x0, &cfg).unwrap();
        for r in [&e, &o, &g] {
            assert_eq!(r.status(), Status::Converged, "seed {seed}");
        }
        let (ce, co, cg) = (rel(&e, &p, &p.x0), rel(&o, &p, &p.x0), rel(&g, &p, &p.x0));
        assert!(gap(&ce, &co) <= 1e-8, "seed {seed}");
        assert!(gap(&ce, &cg) <= 1e-8, "seed {seed}");
    }
}

#[test]
fn deflated_and_original_residuals_agree() {
    let cfg = SolveConfig::default();
    for seed in 0..6u64 {
        let p = random_hermitian_instance(50, 4, 800 + seed).unwrap();
        let d = operator_deflator(&p);
        let runs = [
            rminres_explicit(&d, &p.b, &p.x0, &cfg).unwrap(),
            rminres_deflation_only(&d, &p.b, &p.x0, &cfg).unwrap(),
            deflated_minres_breakdown_free(&d, &p.b, &p.x0, &cfg).unwrap(),
            deflated_minres_adapted_x0(&d, &p.b, &p.x0, &cfg).unwrap(),
            deflated_gmres(&d, &p.b, &p.x0, &cfg).unwrap(),
        ];
        for r in &runs {
            let reference = initial_residual_norm(&p.a, &p.b, &p.x0);
            let dev = gap(&r.relative_original(reference), &r.relative_deflated(reference));
            assert!(dev <= 1e-9, "seed {seed}: {dev:e}");
        }
    }
}

#[test]
fn minimal_residual_curves_never_increase() {
    let cfg = SolveConfig::default();
    for seed in 0..6u64 {
        let p = random_hermitian_instance(60, 5, 900 + seed).unwrap();
        let d = operator_deflator(&p);
        for r in [
            rminres_explicit(&d, &p.b, &p.x0, &cfg).unwrap(),
            deflated_minres_breakdown_free(&d, &p.b, &p.x0, &cfg).unwrap(),
        ] {
            let c = rel(&r, &p, &p.x0);
            for w in c.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "seed {seed}: {} -> {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn invariant_basis_collapses_the_variants() {
    let cfg = full_recurrence();
    for seed in 0..5u64 {
        let p = invariant_instance(40, 4, 1000 + seed).unwrap();
        let d = operator_deflator(&p);
        let e = rminres_explicit(&d, &p.b, &p.x0, &cfg).unwrap();
        let o = rminres_deflation_only(&d, &p.b, &p.x0, &cfg).unwrap();
        let f = deflated_minres_breakdown_free(&d, &p.b, &p.x0, &cfg).unwrap();
        let scale = e.corrected_iterate.norm();
        assert!(e.corrected_iterate.sub(&o.corrected_iterate).norm() <= 1e-10 * scale);
        assert!(e.corrected_iterate.sub(&f.corrected_iterate).norm() <= 1e-10 * scale);
        assert!(gap(&rel(&e, &p, &p.x0), &rel(&f, &p, &p.x0)) <= 1e-10);
    }
}

#[test]
fn evals_experiment_deflation_shortens_minres() {
    let p = indefinite_spectrum_problem(50, 42).unwrap();
    let idx: Vec<usize> = (0..5).chain(50..55).collect();
    let u = deflated_krylov::problems::eigen_deflation_basis(&p, &idx).unwrap();
    let cfg = SolveConfig::default();
    let plain = run_variant(MethodVariant::PlainMinres, &p.a, &p.b, &p.x0, None, DeflatorOptions::default(), &cfg).unwrap();
    let defl = run_variant(
        MethodVariant::DeflatedMinresBreakdownFree,
        &p.a,
        &p.b,
        &p.x0,
        Some(&u),
        DeflatorOptions::default(),
        &cfg,
    )
    .unwrap();
    assert_eq!(plain.status(), Status::Converged);
    assert_eq!(defl.status(), Status::Converged);
    assert!(defl.iterations() < plain.iterations());
}

#[test]
fn breakdown_free_variant_survives_the_breakdown_geometry() {
    let p = indefinite_spectrum_problem(50, 42).unwrap();
    let idx: Vec<usize> = (0..10).collect();
    let u = breakdown_deflation_basis(&p, &idx).unwrap();
    let d = Deflator::new(p.a.clone(), u.clone(), GalerkinMode::Operator).unwrap();
    let c = Vector::unit(10, 3);
    let x0 = deflated_krylov::analysis::construct_breakdown_guess(&p.a, &p.b, &u, &c).unwrap();
    let cfg = SolveConfig {
        tol: 1e-12,
        ..Default::default()
    };
    let broken = rminres_explicit(&d, &p.b, &x0, &cfg).unwrap();
    assert_eq!(broken.status(), Status::Breakdown { iteration: 1 });
    for r in [
        deflated_minres_breakdown_free(&d, &p.b, &x0, &cfg).unwrap(),
        deflated_minres_adapted_x0(&d, &p.b, &x0, &cfg).unwrap(),
    ] {
        assert_eq!(r.status(), Status::Converged);
        assert!(r.iterations() <= 1);
        let res = p.b.sub(&p.a.matvec(&r.corrected_iterate)).norm();
        assert!(res <= 1e-12 * initial_residual_norm(&p.a, &p.b, &x0));
    }
}

fn hpd_diag(values: &[f64]) -> Arc<Matrix> {
    let d: Vec<C64> = values.iter().map(|&v| re(v)).collect();
    Arc::new(Matrix::from_diagonal(&d))
}

#[test]
fn deflated_cg_beats_plain_cg_on_a_diagonal_matrix() {
    let mut values: Vec<f64> = vec![1e-4, 2e-4, 5e-4];
    values.extend((0..60).map(|i| 1.0 + i as f64 / 10.0));
    let a = hpd_diag(&values);
    let n = values.len();
    let u = Matrix::from_columns(&[Vector::unit(n, 0), Vector::unit(n, 1), Vector::unit(n, 2)]);
    let d = Deflator::new(a.clone(), u, GalerkinMode::Identity).unwrap();
    let b = random_complex_matrix(n, 1, &mut seeded_rng(3)).column(0);
    let x0 = Vector::zeros(n);
    let cfg = SolveConfig::default();
    let plain = plain_cg(&a, &b, &x0, &cfg).unwrap();
    let defl = deflated_cg(&d, &b, &x0, &cfg).unwrap();
    assert_eq!(defl.status(), Status::Converged);
    assert!(defl.iterations() < plain.iterations());
    let res = b.sub(&a.matvec(&defl.corrected_iterate)).norm();
    assert!(res <= 10.0 * cfg.tol * b.norm());
}

#[test]
fn deflated_cg_from_the_solution_stops_immediately() {
    let a = hpd_diag(&[1.0, 2.0, 3.0, 4.0]);
    let u = Matrix::from_columns(&[Vector::unit(4, 0)]);
    let d = Deflator::new(a.clone(), u, GalerkinMode::Identity).unwrap();
    let x = Vector::from_real(&[1.0, -1.0, 2.0, 0.5]);
    let b = a.matvec(&x);
    let r = deflated_cg(&d, &b, &x, &SolveConfig::default()).unwrap();
    assert_eq!(r.status(), Status::Converged);
    assert_eq!(r.iterations(), 0);
}

/// `A = V D V⁻¹` with random complex `V` and `U` its first `k` columns.
fn nonnormal_invariant(n: usize, k: usize, seed: u64) -> (Arc<Matrix>, Matrix) {
    let mut rng = seeded_rng(seed);
    let v = random_complex_matrix(n, n, &mut rng).add(&Matrix::identity(n).scaled(re(3.0)));
    let d: Vec<C64> = (0..n).map(|i| C64::new(1.0 + i as f64 / n as f64, 0.3)).collect();
    let lu = Lu::new(&v, 1e-14).unwrap();
    let inv_cols: Vec<Vector> = (0..n).map(|j| lu.solve(&Vector::unit(n, j))).collect();
    let v_inv = Matrix::from_columns(&inv_cols);
    let a = v.matmul(&Matrix::from_diagonal(&d)).matmul(&v_inv);
    let u = v.select_columns(&(0..k).collect::<Vec<_>>()).unwrap();
    (Arc::new(a), u)
}

#[test]
fn gmres_with_an_invariant_basis_does_not_break_down() {
    let (a, u) = nonnormal_invariant(30, 3, 77);
    let d = Deflator::new(a.clone(), u, GalerkinMode::Operator).unwrap();
    let b = random_complex_matrix(30, 1, &mut seeded_rng(78)).column(0);
    for trial in 0..10 {
        let x0 = random_complex_matrix(30, 1, &mut seeded_rng(100 + trial)).column(0);
        let r = deflated_gmres(&d, &b, &x0, &SolveConfig::default()).unwrap();
        assert_eq!(r.status(), Status::Converged, "trial {trial}");
    }
}

#[test]
fn variants_check_the_galerkin_mode() {
    let p = random_hermitian_instance(20, 2, 5).unwrap();
    let opts = DeflatorOptions {
        allow_non_hpd: true,
        ..Default::default()
    };
    let d = Deflator::with_options(p.a.clone(), p.u.clone().unwrap(), GalerkinMode::Identity, opts).unwrap();
    let r = rminres_explicit(&d, &p.b, &p.x0, &SolveConfig::default());
    assert!(matches!(r, Err(Error::ModeMismatch { .. })));
    let d = operator_deflator(&p);
    let r = deflated_cg(&d, &p.b, &p.x0, &SolveConfig::default());
    assert!(matches!(r, Err(Error::ModeMismatch { .. })));
}

#[test]
fn run_variant_needs_a_basis_for_deflated_methods() {
    let p = random_hermitian_instance(20, 2, 6).unwrap();
    let r = run_variant(
        MethodVariant::DeflatedGmres,
        &p.a,
        &p.b,
        &p.x0,
        None,
        DeflatorOptions::default(),
        &SolveConfig::default(),
    );
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
}

#[test]
fn variant_names_round_trip() {
    for v in MethodVariant::ALL {
        assert_eq!(v.name().parse::<MethodVariant>().unwrap(), v);
    }
    assert!("nope".parse::<MethodVariant>().is_err());
    assert_eq!(MethodVariant::DeflatedCg.required_mode(), Some(GalerkinMode::Identity));
    assert_eq!(MethodVariant::PlainMinres.required_mode(), None);
    assert_eq!(MethodVariant::DeflatedGmres.required_mode(), Some(GalerkinMode::Operator));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn adapted_guess_matches_breakdown_free(n in 12usize..50, k in 1usize..6, seed in any::<u64>()) {
        let p = random_hermitian_instance(n, k.min(n - 1), seed).unwrap();
        let d = operator_deflator(&p);
        let cfg = full_recurrence();
        let bf = deflated_minres_breakdown_free(&d, &p.b, &p.x0, &cfg).unwrap();
        let ad = deflated_minres_adapted_x0(&d, &p.b, &p.x0, &cfg).unwrap();
        let (cb, ca) = (rel(&bf, &p, &p.x0), rel(&ad, &p, &p.x0));
        prop_assert_eq!(cb.len(), ca.len());
        prop_assert!(gap(&cb, &ca) <= 1e-8);
    }

    #[test]
    fn explicit_and_deflation_only_agree(n in 12usize..50, k in 1usize..6, seed in any::<u64>()) {
        let p = random_hermitian_instance(n, k.min(n - 1), seed).unwrap();
        let d = operator_deflator(&p);
        let cfg = SolveConfig::default();
        let e = rminres_explicit(&d, &p.b, &p.x0, &cfg).unwrap();
        let o = rminres_deflation_only(&d, &p.b, &p.x0, &cfg).unwrap();
        prop_assert!(gap(&rel(&e, &p, &p.x0), &rel(&o, &p, &p.x0)) <= 1e-8);
    }
}
