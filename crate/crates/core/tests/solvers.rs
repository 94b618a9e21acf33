use std::sync::Arc;

use deflated_krylov::linalg::{random_complex_matrix, re, seeded_rng, Matrix, Qr, Vector, C64};
use deflated_krylov::operator::{composed_deflated_operator, dense_operator, Composition};
use deflated_krylov::problems::{random_hermitian_instance, toy_breakdown_2x2, toy_near_invariant_3x3};
use deflated_krylov::projection::{Deflator, GalerkinMode};
use deflated_krylov::solvers::{cg_solve, gmres_solve, minres_solve, SolveConfig, Status};
use deflated_krylov::Error;
use proptest::prelude::*;

fn hpd(n: usize, seed: u64) -> Matrix {
    let g = random_complex_matrix(n, n, &mut seeded_rng(seed));
    g.adjoint_matmul(&g).scaled(re(1.0 / n as f64)).add(&Matrix::identity(n))
}

/// Orthonormal basis of `K_n(A, r)` built from explicit powers.
fn krylov_basis(a: &Matrix, r: &Vector, n: usize) -> Matrix {
    let mut cols = vec![r.scaled(re(1.0 / r.norm()))];
    for _ in 1..n {
        let next = a.matvec(cols.last().unwrap());
        let norm = next.norm();
        cols.push(next.scaled(re(1.0 / norm)));
    }
    Qr::new(&Matrix::from_columns(&cols)).into_parts().0
}

fn hermitian_problem(n: usize, seed: u64) -> (Arc<Matrix>, Vector) {
    let p = random_hermitian_instance(n, 1, seed).unwrap();
    (p.a, p.b)
}

#[test]
fn minres_is_minimal_over_the_krylov_space() {
    for seed in 0..5 {
        let (a, b) = hermitian_problem(30, seed);
        let op = dense_operator(a.clone()).unwrap();
        let x0 = Vector::zeros(30);
        let cfg = SolveConfig {
            max_iterations: 8,
            stagnation_window: None,
            ..Default::default()
        };
        let report = minres_solve(&op, &b, &x0, &cfg).unwrap();
        for n in 1..=8 {
            let v = krylov_basis(&a, &b, n);
            let qr = Qr::new(&a.matmul(&v));
            let y = qr.solve_r(&qr.q().matvec_adjoint(&b));
            let best = b.sub(&a.matvec(&v.matvec(&y))).norm();
            let got = report.residual_norms[n];
            assert!((got - best).abs() <= 1e-8 * b.norm(), "seed {seed} n {n}: {got} vs {best}");
        }
    }
}

#[test]
fn minres_matches_gmres_on_hermitian_systems() {
    for seed in 10..14 {
        let (a, b) = hermitian_problem(40, seed);
        let op = dense_operator(a).unwrap();
        let x0 = Vector::zeros(40);
        // runs last about N steps; without reorthogonalization the short
        // recurrence drifts from the full one at the 1e-8 level near the end
        let cfg = SolveConfig {
            reorthogonalize: true,
            ..Default::default()
        };
        let m = minres_solve(&op, &b, &x0, &cfg).unwrap();
        let g = gmres_solve(&op, &b, &x0, &cfg).unwrap();
        let len = m.residual_norms.len().min(g.residual_norms.len());
        let gap = (0..len)
            .map(|i| (m.residual_norms[i] - g.residual_norms[i]).abs())
            .fold(0.0, f64::max);
        assert!(gap <= 1e-8 * b.norm(), "seed {seed}: gap {gap:e}");
        assert_eq!(m.status, Status::Converged);
        assert_eq!(g.status, Status::Converged);
    }
}

#[test]
fn cg_residuals_are_orthogonal_to_the_krylov_space() {
    let a = hpd(25, 3);
    let op = dense_operator(a.clone()).unwrap();
    let b = random_complex_matrix(25, 1, &mut seeded_rng(4)).column(0);
    let x0 = Vector::zeros(25);
    for n in 1..=6 {
        let cfg = SolveConfig {
            max_iterations: n,
            stagnation_window: None,
            ..Default::default()
        };
        let report = cg_solve(&op, &b, &x0, &cfg).unwrap();
        let r = b.sub(&a.matvec(&report.solution));
        let v = krylov_basis(&a, &b, n);
        let defect = v.matvec_adjoint(&r).norm();
        assert!(defect <= 1e-10 * a.norm_2() * b.norm(), "n {n}: {defect:e}");
    }
}

#[test]
fn identity_converges_in_one_step() {
    let op = dense_operator(Matrix::identity(6)).unwrap();
    let b = Vector::from_real(&[1.0, -2.0, 3.0, 0.5, 0.0, 4.0]);
    let x0 = Vector::zeros(6);
    let cfg = SolveConfig::default();
    for report in [
        cg_solve(&op, &b, &x0, &cfg).unwrap(),
        minres_solve(&op, &b, &x0, &cfg).unwrap(),
        gmres_solve(&op, &b, &x0, &cfg).unwrap(),
    ] {
        assert_eq!(report.status, Status::Converged);
        assert_eq!(report.iterations, 1);
        assert!(report.solution.sub(&b).norm() < 1e-14);
    }
}

#[test]
fn diagonal_solve() {
    let a = Matrix::from_diagonal(&[re(1.0), re(2.0), re(3.0)]);
    let op = dense_operator(a).unwrap();
    let b = Vector::from_real(&[1.0, 1.0, 1.0]);
    let report = minres_solve(&op, &b, &Vector::zeros(3), &SolveConfig::default()).unwrap();
    assert_eq!(report.status, Status::Converged);
    assert!(report.iterations <= 3);
    let x = Vector::from_real(&[1.0, 0.5, 1.0 / 3.0]);
    assert!(report.solution.sub(&x).norm() < 1e-10);
}

#[test]
fn cg_on_random_hpd() {
    let a = hpd(50, 8);
    let op = dense_operator(a.clone()).unwrap();
    let b = random_complex_matrix(50, 1, &mut seeded_rng(9)).column(0);
    let report = cg_solve(&op, &b, &Vector::zeros(50), &SolveConfig::default()).unwrap();
    assert_eq!(report.status, Status::Converged);
    assert!(report.iterations <= 50);
    assert!(b.sub(&a.matvec(&report.solution)).norm() <= 1e-10 * b.norm());
}

#[test]
fn cg_rejects_indefinite_operators() {
    let a = Matrix::from_diagonal(&[re(1.0), re(-1.0)]);
    let op = dense_operator(a).unwrap();
    let b = Vector::from_real(&[1.0, 2.0]);
    let r = cg_solve(&op, &b, &Vector::zeros(2), &SolveConfig::default());
    assert!(matches!(r, Err(Error::IndefiniteDetected { .. })));
}

#[test]
fn minres_rejects_non_hermitian_operators() {
    let a = Matrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
    let op = dense_operator(a).unwrap();
    let b = Vector::from_real(&[1.0, 1.0]);
    let r = minres_solve(&op, &b, &Vector::zeros(2), &SolveConfig::default());
    assert!(matches!(r, Err(Error::NotHermitian { .. })));
}

#[test]
fn gmres_on_nonsingular_random_matrix() {
    let a = random_complex_matrix(30, 30, &mut seeded_rng(21)).add(&Matrix::identity(30).scaled(re(8.0)));
    let op = dense_operator(a.clone()).unwrap();
    let b = random_complex_matrix(30, 1, &mut seeded_rng(22)).column(0);
    let report = gmres_solve(&op, &b, &Vector::zeros(30), &SolveConfig::default()).unwrap();
    assert_eq!(report.status, Status::Converged);
    assert!(b.sub(&a.matvec(&report.solution)).norm() <= 1e-10 * b.norm());
}

#[test]
fn breakdown_on_the_2x2_example() {
    let p = toy_breakdown_2x2();
    let d = Deflator::new(p.a.clone(), p.u.clone().unwrap(), GalerkinMode::Operator).unwrap();
    let b = d.apply_p(&p.b);
    let x0 = Vector::zeros(2);
    let cfg = SolveConfig::default();

    let left = composed_deflated_operator(&d, Composition::ProjectedLeft).unwrap();
    let g = gmres_solve(&left, &b, &x0, &cfg).unwrap();
    assert_eq!(g.status, Status::Breakdown { iteration: 1 });
    assert_eq!(g.residual_norms, vec![1.0]);

    let both = composed_deflated_operator(&d, Composition::ProjectedBoth).unwrap();
    let m = minres_solve(&both, &b, &x0, &cfg).unwrap();
    assert_eq!(m.status, Status::Breakdown { iteration: 1 });
    assert_eq!(m.residual_norms, vec![1.0]);
}

#[test]
fn gmres_breakdown_on_the_near_invariant_example() {
    let p = toy_near_invariant_3x3(1e-3).unwrap();
    let d = Deflator::new(p.a.clone(), p.u.clone().unwrap(), GalerkinMode::Operator).unwrap();
    let op = composed_deflated_operator(&d, Composition::ProjectedLeft).unwrap();
    let b = d.apply_p(&p.b);
    let x = p.known_solution.clone().unwrap();
    for beta in [1.0, -3.0, 0.25] {
        let x0 = x.add(&Vector::unit(3, 0).scaled(re(beta)));
        let r = gmres_solve(&op, &b, &x0, &SolveConfig::default()).unwrap();
        assert_eq!(r.status, Status::Breakdown { iteration: 1 }, "beta {beta}");
    }
}

#[test]
fn lucky_termination_is_convergence() {
    // b is an eigenvector: the Lanczos vector vanishes with a zero residual
    let a = Matrix::from_diagonal(&[re(2.0), re(3.0), re(5.0)]);
    let op = dense_operator(a).unwrap();
    let b = Vector::unit(3, 1);
    let cfg = SolveConfig {
        tol: 1e-300,
        ..Default::default()
    };
    for r in [
        minres_solve(&op, &b, &Vector::zeros(3), &cfg).unwrap(),
        gmres_solve(&op, &b, &Vector::zeros(3), &cfg).unwrap(),
    ] {
        assert!(!matches!(r.status, Status::Breakdown { .. }), "{}", r.status);
        assert!(r.final_residual() < 1e-15);
    }
}

#[test]
fn orthogonality_drift_is_reported() {
    let (a, b) = hermitian_problem(40, 30);
    let op = dense_operator(a).unwrap();
    let x0 = Vector::zeros(40);
    let plain = SolveConfig::default();
    assert!(minres_solve(&op, &b, &x0, &plain).unwrap().orthogonality_drift.is_none());
    let measured = SolveConfig {
        measure_orthogonality: true,
        ..Default::default()
    };
    let drift = minres_solve(&op, &b, &x0, &measured).unwrap().orthogonality_drift.unwrap();
    assert!(drift.is_finite());
    let reorth = SolveConfig {
        measure_orthogonality: true,
        reorthogonalize: true,
        ..Default::default()
    };
    let tight = minres_solve(&op, &b, &x0, &reorth).unwrap().orthogonality_drift.unwrap();
    assert!(tight <= 1e-12, "{tight:e}");
    assert!(tight <= drift.max(1e-12));
}

#[test]
fn thin_history_keeps_endpoints() {
    let (a, b) = hermitian_problem(20, 31);
    let op = dense_operator(a).unwrap();
    let x0 = Vector::zeros(20);
    let full = minres_solve(&op, &b, &x0, &SolveConfig::default()).unwrap();
    let cfg = SolveConfig {
        record_history: false,
        ..Default::default()
    };
    let thin = minres_solve(&op, &b, &x0, &cfg).unwrap();
    assert_eq!(thin.residual_norms.len(), 2);
    assert_eq!(thin.residual_norms[0], full.residual_norms[0]);
    assert_eq!(thin.residual_norms[1], *full.residual_norms.last().unwrap());
    assert_eq!(thin.iterations, full.iterations);
}

#[test]
fn invalid_configuration_is_rejected() {
    let op = dense_operator(Matrix::identity(2)).unwrap();
    let b = Vector::from_real(&[1.0, 0.0]);
    let cfg = SolveConfig {
        breakdown_threshold: -1.0,
        ..Default::default()
    };
    assert!(matches!(
        minres_solve(&op, &b, &Vector::zeros(2), &cfg),
        Err(Error::InvalidParameter(_))
    ));
    let short = vec![C64::new(0.0, 0.0)];
    assert!(matches!(
        gmres_solve(&op, &b, &short, &SolveConfig::default()),
        Err(Error::DimensionMismatch { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn minres_residuals_start_at_r0_and_never_increase(n in 5usize..40, seed in any::<u64>()) {
        let (a, b) = hermitian_problem(n, seed);
        let op = dense_operator(a.clone()).unwrap();
        let x0 = random_complex_matrix(n, 1, &mut seeded_rng(seed ^ 5)).column(0);
        let r0 = b.sub(&a.matvec(&x0)).norm();
        let cfg = SolveConfig { reorthogonalize: true, ..Default::default() };
        let r = minres_solve(&op, &b, &x0, &cfg).unwrap();
        prop_assert!((r.residual_norms[0] - r0).abs() <= 1e-14 * r0);
        for w in r.residual_norms.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * r0);
        }
        prop_assert_eq!(r.status, Status::Converged);
    }

    #[test]
    fn gmres_residuals_never_increase(n in 5usize..30, seed in any::<u64>()) {
        let a = random_complex_matrix(n, n, &mut seeded_rng(seed)).add(&Matrix::identity(n).scaled(re(6.0)));
        let op = dense_operator(a).unwrap();
        let b = random_complex_matrix(n, 1, &mut seeded_rng(seed ^ 9)).column(0);
        let r = gmres_solve(&op, &b, &Vector::zeros(n), &SolveConfig::default()).unwrap();
        let r0 = r.residual_norms[0];
        for w in r.residual_norms.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * r0);
        }
    }
}
