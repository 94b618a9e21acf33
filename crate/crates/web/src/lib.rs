//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string so the page needs no generated TypeScript types.

use deflated_krylov::analysis::{breakdown_condition, construct_breakdown_guess, deflated_spectrum_check};
use deflated_krylov::deflated::{initial_residual_norm, run_variant, MethodVariant};
use deflated_krylov::linalg::{random_complex_matrix, re, seeded_rng, Matrix};
use deflated_krylov::problems::{
    breakdown_deflation_basis, eigen_deflation_basis, indefinite_spectrum_problem, perturb_basis, TestProblem,
};
use deflated_krylov::projection::{DeflatorOptions, GalerkinMode};
use deflated_krylov::solvers::SolveConfig;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curve {
    variant: &'static str,
    status: String,
    iterations: usize,
    residuals: Vec<f64>,
}

#[derive(Serialize)]
struct Convergence {
    dimension: usize,
    curves: Vec<Curve>,
}

#[derive(Serialize)]
struct Diagnosis {
    intersection_nontrivial: bool,
    indicator: f64,
    angle_deg: f64,
    curves: Vec<Curve>,
}

#[derive(Serialize)]
struct Spectrum {
    computed: Vec<f64>,
    expected: Vec<f64>,
    max_mismatch: f64,
}

#[derive(Serialize)]
struct Failure {
    error: String,
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&Failure { error }),
    }
    .expect("plain data serializes")
}

fn err(e: deflated_krylov::Error) -> String {
    e.to_string()
}

/// Eigenvector basis of the `k` smallest eigenvalues in magnitude on each
/// side of the spectrum `±√j`.
fn smallest_pairs(p: &TestProblem, m: usize, k: usize) -> Result<Matrix, String> {
    let idx: Vec<usize> = (0..k).chain(m..m + k).collect();
    eigen_deflation_basis(p, &idx).map_err(err)
}

fn curves(
    p: &TestProblem,
    u: &Matrix,
    x0: &[deflated_krylov::C64],
    variants: &[MethodVariant],
    cfg: &SolveConfig,
) -> Result<Vec<Curve>, String> {
    let reference = initial_residual_norm(&p.a, &p.b, x0).max(f64::MIN_POSITIVE);
    variants
        .iter()
        .map(|&v| {
            let r = run_variant(v, &p.a, &p.b, x0, Some(u), DeflatorOptions::default(), cfg).map_err(err)?;
            Ok(Curve {
                variant: v.name(),
                status: r.status().to_string(),
                iterations: r.iterations(),
                residuals: r.relative_original(reference),
            })
        })
        .collect()
}

/// Plain MINRES against three deflated variants on the spectrum `±√j`,
/// `j = 1..m`, deflating `k` eigenvalues on each side.
#[wasm_bindgen]
pub fn convergence(m: usize, k: usize, seed: u64, tol: f64) -> String {
    to_json((|| {
        if k == 0 || k >= m {
            return Err(format!("need 0 < k < m, got k = {k}, m = {m}"));
        }
        let p = indefinite_spectrum_problem(m, seed).map_err(err)?;
        let u = smallest_pairs(&p, m, k)?;
        let cfg = SolveConfig {
            tol,
            max_iterations: 4 * p.dim(),
            ..SolveConfig::default()
        };
        let variants = [
            MethodVariant::PlainMinres,
            MethodVariant::RminresExplicit,
            MethodVariant::DeflatedMinresBreakdownFree,
            MethodVariant::DeflatedGmres,
        ];
        Ok(Convergence {
            dimension: p.dim(),
            curves: curves(&p, &u, &p.x0, &variants, &cfg)?,
        })
    })())
}

/// Breakdown geometry: basis `wᵢ + w_{i+m}`, `i < k`, optionally perturbed
/// by a matrix of 2-norm `eps`, started from the breakdown guess plus
/// `guess_noise` times a Gaussian vector.
#[wasm_bindgen]
pub fn breakdown(m: usize, k: usize, seed: u64, eps: f64, guess_noise: f64) -> String {
    to_json((|| {
        let p = indefinite_spectrum_problem(m, seed).map_err(err)?;
        let u1 = breakdown_deflation_basis(&p, &(0..k).collect::<Vec<_>>()).map_err(err)?;
        let c = breakdown_condition(&p.a, &u1)
            .map_err(err)?
            .intersection_coefficients
            .ok_or("the unperturbed basis is not flagged")?;
        let mut x0 = construct_breakdown_guess(&p.a, &p.b, &u1, &c).map_err(err)?;
        if guess_noise > 0.0 {
            let g = random_complex_matrix(p.dim(), 1, &mut seeded_rng(seed ^ 0x5eed)).column(0);
            x0 = x0.add(&g.scaled(re(guess_noise)));
        }
        let u = if eps > 0.0 {
            perturb_basis(&u1, eps, seed).map_err(err)?
        } else {
            u1
        };
        let diag = breakdown_condition(&p.a, &u).map_err(err)?;
        let cfg = SolveConfig {
            tol: 1e-13,
            max_iterations: 2 * p.dim(),
            ..SolveConfig::default()
        };
        let variants = [
            MethodVariant::RminresExplicit,
            MethodVariant::RminresDeflationOnly,
            MethodVariant::DeflatedMinresBreakdownFree,
        ];
        Ok(Diagnosis {
            intersection_nontrivial: diag.intersection_nontrivial,
            indicator: diag.smallest_singular_value,
            angle_deg: diag.largest_principal_angle_deg(),
            curves: curves(&p, &u, &x0, &variants, &cfg)?,
        })
    })())
}

/// Eigenvalues of `P_A A` next to `{0}^{2k} ∪ {±√j : j > k}`.
#[wasm_bindgen]
pub fn deflated_spectrum(m: usize, k: usize, seed: u64) -> String {
    to_json((|| {
        let p = indefinite_spectrum_problem(m, seed).map_err(err)?;
        let u = smallest_pairs(&p, m, k)?;
        let c = deflated_spectrum_check(&p.a, &u, GalerkinMode::Operator).map_err(err)?;
        Ok(Spectrum {
            computed: c.computed,
            expected: c.expected,
            max_mismatch: c.max_mismatch,
        })
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn convergence_returns_four_curves() {
        let v = parse(&convergence(20, 3, 1, 1e-10));
        let curves = v["curves"].as_array().unwrap();
        assert_eq!(curves.len(), 4);
        assert!(curves.iter().all(|c| c["status"] == "converged"));
    }

    #[test]
    fn breakdown_shows_both_outcomes() {
        let v = parse(&breakdown(20, 4, 2, 0.0, 0.0));
        assert_eq!(v["intersection_nontrivial"], true);
        assert_eq!(v["curves"][0]["status"], "breakdown@1");
        assert_eq!(v["curves"][2]["status"], "converged");
    }

    #[test]
    fn spectrum_matches() {
        let v = parse(&deflated_spectrum(15, 2, 3));
        assert!(v["max_mismatch"].as_f64().unwrap() < 1e-8);
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(parse(&convergence(5, 5, 0, 1e-8))["error"].is_string());
    }
}
