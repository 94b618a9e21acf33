//! Experiment description files.
//!
//! A spec is TOML (or JSON when the file ends in `.json`). Indices in spec
//! files are 1-based; they are converted to 0-based when the problem is
//! built.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use deflated_krylov::analysis::{breakdown_condition, construct_breakdown_guess};
use deflated_krylov::deflated::MethodVariant;
use deflated_krylov::linalg::{random_complex_matrix, re, seeded_rng, Matrix, Vector};
use deflated_krylov::problems::io::read_matrix_market;
use deflated_krylov::problems::{
    breakdown_deflation_basis, clustered_hpd_problem, eigen_deflation_basis,
    indefinite_spectrum_problem, invariant_instance, paired_spectrum_instance, perturb_basis,
    random_hermitian_instance, toy_breakdown_2x2, toy_near_invariant_3x3, TestProblem,
};
use deflated_krylov::solvers::SolveConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub deflation: Option<DeflationSpec>,
    #[serde(default)]
    pub initial_guess: Option<GuessSpec>,
    #[serde(default)]
    pub variants: Vec<String>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// One of `indefinite_spectrum`, `clustered_hpd`, `random_hermitian`,
    /// `paired_spectrum`, `invariant`, `toy_breakdown_2x2`,
    /// `toy_near_invariant_3x3` or `matrix_market`.
    pub generator: String,
    #[serde(default)]
    pub seed: u64,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub outliers: Option<usize>,
    pub paired: Option<usize>,
    pub alpha: Option<f64>,
    /// Matrix Market files for the `matrix_market` generator.
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeflationSpec {
    /// Eigenvector indices of the generator's eigenbasis.
    pub eigen: Option<Vec<usize>>,
    /// Indices `i` of the vectors `wᵢ + w_{i+m}`.
    pub breakdown: Option<Vec<usize>>,
    /// Matrix Market array file with the basis columns.
    pub file: Option<PathBuf>,
    /// Use the basis the generator ships with.
    #[serde(default)]
    pub generated: bool,
    pub perturbation: Option<f64>,
    #[serde(default)]
    pub perturbation_seed: u64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GuessSpec {
    /// `zero`, `breakdown` or `file`.
    pub kind: String,
    /// For `breakdown`: use `U e_j` instead of the computed intersection
    /// vector.
    pub coefficient: Option<usize>,
    pub file: Option<PathBuf>,
    /// Adds `scale · g` with `g` a seeded complex Gaussian vector.
    pub perturbation_scale: Option<f64>,
    #[serde(default)]
    pub perturbation_seed: u64,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub breakdown_threshold: Option<f64>,
    pub explicit_residuals: Option<bool>,
    pub reorthogonalize: Option<bool>,
    /// `0` disables the no-progress rule.
    pub stagnation_window: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug)]
pub enum SpecError {
    Parse(String),
    Build(String),
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecError::Parse(m) => write!(f, "spec error: {m}"),
            SpecError::Build(m) => write!(f, "construction error: {m}"),
        }
    }
}

fn build_err(e: impl std::fmt::Display) -> SpecError {
    SpecError::Build(e.to_string())
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpecError::Parse(format!("{}: {e}", path.display())))?;
        let spec: ExperimentSpec = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| SpecError::Parse(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| SpecError::Parse(e.to_string()))?
        };
        spec.resolve_paths(path.parent().unwrap_or(Path::new(".")))
            .validate()
    }

    /// Relative file references are taken relative to the spec file.
    fn resolve_paths(mut self, base: &Path) -> Self {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.problem.a);
        fix(&mut self.problem.b);
        if let Some(d) = &mut self.deflation {
            fix(&mut d.file);
        }
        if let Some(g) = &mut self.initial_guess {
            fix(&mut g.file);
        }
        self
    }

    fn validate(self) -> Result<Self, SpecError> {
        self.parsed_variants()?;
        if let Some(d) = &self.deflation {
            let sources = [d.eigen.is_some(), d.breakdown.is_some(), d.file.is_some(), d.generated];
            if sources.iter().filter(|&&s| s).count() != 1 {
                return Err(SpecError::Parse(
                    "deflation needs exactly one of eigen, breakdown, file, generated".into(),
                ));
            }
            let indices = d.eigen.iter().chain(&d.breakdown).flatten();
            if indices.clone().any(|&i| i == 0) {
                return Err(SpecError::Parse("deflation indices are 1-based".into()));
            }
        }
        if let Some(g) = &self.initial_guess {
            if !matches!(g.kind.as_str(), "zero" | "breakdown" | "file") {
                return Err(SpecError::Parse(format!("unknown initial guess kind `{}`", g.kind)));
            }
            if g.coefficient == Some(0) {
                return Err(SpecError::Parse("initial_guess.coefficient is 1-based".into()));
            }
        }
        Ok(self)
    }

    pub fn parsed_variants(&self) -> Result<Vec<MethodVariant>, SpecError> {
        self.variants
            .iter()
            .map(|v| v.parse().map_err(|e| SpecError::Parse(format!("{e}"))))
            .collect()
    }

    pub fn solve_config(&self) -> SolveConfig {
        let mut cfg = SolveConfig::default();
        let s = &self.solver;
        if let Some(t) = s.tol {
            cfg.tol = t;
        }
        if let Some(m) = s.max_iterations {
            cfg.max_iterations = m;
        }
        if let Some(t) = s.breakdown_threshold {
            cfg.breakdown_threshold = t;
        }
        if let Some(e) = s.explicit_residuals {
            cfg.explicit_residuals = e;
        }
        if let Some(r) = s.reorthogonalize {
            cfg.reorthogonalize = r;
        }
        if let Some(w) = s.stagnation_window {
            cfg.stagnation_window = (w > 0).then_some(w);
        }
        cfg
    }
}

/// Everything a run needs, built once and shared read-only by the variants.
pub struct Setup {
    pub problem: TestProblem,
    pub u: Option<Matrix>,
    pub x0: Vector,
}

fn read_mm(path: &Path) -> Result<Matrix, SpecError> {
    let file = File::open(path).map_err(|e| build_err(format!("{}: {e}", path.display())))?;
    read_matrix_market(BufReader::new(file)).map_err(|e| build_err(format!("{}: {e}", path.display())))
}

fn read_mm_vector(path: &Path) -> Result<Vector, SpecError> {
    let m = read_mm(path)?;
    if m.cols() != 1 {
        return Err(build_err(format!("{}: expected a single column", path.display())));
    }
    Ok(m.column(0))
}

fn need<T: Copy>(v: Option<T>, name: &str, generator: &str) -> Result<T, SpecError> {
    v.ok_or_else(|| SpecError::Parse(format!("generator `{generator}` needs `{name}`")))
}

fn zero_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i - 1).collect()
}

pub fn build_problem(p: &ProblemSpec) -> Result<TestProblem, SpecError> {
    let g = p.generator.as_str();
    let problem = match g {
        "indefinite_spectrum" => indefinite_spectrum_problem(need(p.m, "m", g)?, p.seed),
        "clustered_hpd" => clustered_hpd_problem(need(p.n, "n", g)?, need(p.outliers, "outliers", g)?, p.seed),
        "random_hermitian" => random_hermitian_instance(need(p.n, "n", g)?, need(p.k, "k", g)?, p.seed),
        "paired_spectrum" => {
            paired_spectrum_instance(need(p.m, "m", g)?, need(p.k, "k", g)?, need(p.paired, "paired", g)?, p.seed)
        }
        "invariant" => invariant_instance(need(p.n, "n", g)?, need(p.k, "k", g)?, p.seed),
        "toy_breakdown_2x2" => Ok(toy_breakdown_2x2()),
        "toy_near_invariant_3x3" => toy_near_invariant_3x3(need(p.alpha, "alpha", g)?),
        "matrix_market" => {
            let a_path = p.a.as_ref().ok_or_else(|| SpecError::Parse("matrix_market needs `a`".into()))?;
            let a = read_mm(a_path)?;
            let b = match &p.b {
                Some(path) => read_mm_vector(path)?,
                None => Vector::from_vec(vec![re(1.0); a.rows()]),
            };
            if a.rows() != a.cols() || b.len() != a.rows() {
                return Err(build_err(format!(
                    "A is {}x{} but b has length {}",
                    a.rows(),
                    a.cols(),
                    b.len()
                )));
            }
            let n = a.rows();
            return Ok(TestProblem {
                label: format!("matrix_market({})", a_path.display()),
                seed: p.seed,
                a: Arc::new(a),
                b,
                x0: Vector::zeros(n),
                u: None,
                known_solution: None,
                known_spectrum: None,
                eigenvectors: None,
                eigenvalues: None,
            });
        }
        other => return Err(SpecError::Parse(format!("unknown generator `{other}`"))),
    };
    problem.map_err(build_err)
}

pub fn build_basis(d: &DeflationSpec, p: &TestProblem) -> Result<Matrix, SpecError> {
    let u = if let Some(idx) = &d.eigen {
        eigen_deflation_basis(p, &zero_based(idx)).map_err(build_err)?
    } else if let Some(idx) = &d.breakdown {
        breakdown_deflation_basis(p, &zero_based(idx)).map_err(build_err)?
    } else if let Some(path) = &d.file {
        read_mm(path)?
    } else {
        p.u.clone()
            .ok_or_else(|| build_err(format!("problem {} has no generated basis", p.label)))?
    };
    if u.rows() != p.dim() {
        return Err(build_err(format!("basis has {} rows, A has {}", u.rows(), p.dim())));
    }
    match d.perturbation {
        Some(eps) => perturb_basis(&u, eps, d.perturbation_seed).map_err(build_err),
        None => Ok(u),
    }
}

fn build_guess(g: &GuessSpec, p: &TestProblem, u: Option<&Matrix>) -> Result<Vector, SpecError> {
    let mut x0 = match g.kind.as_str() {
        "zero" => p.x0.clone(),
        "file" => {
            let path = g.file.as_ref().ok_or_else(|| SpecError::Parse("initial_guess file missing".into()))?;
            let x = read_mm_vector(path)?;
            if x.len() != p.dim() {
                return Err(build_err(format!("x0 has length {}, A has {}", x.len(), p.dim())));
            }
            x
        }
        _ => {
            let u = u.ok_or_else(|| build_err("a breakdown guess needs a deflation basis"))?;
            let c = match g.coefficient {
                Some(j) if j <= u.cols() => Vector::unit(u.cols(), j - 1),
                Some(j) => return Err(build_err(format!("coefficient {j} exceeds {} columns", u.cols()))),
                None => breakdown_condition(&p.a, u)
                    .map_err(build_err)?
                    .intersection_coefficients
                    .ok_or_else(|| build_err("U ∩ (AU)^⊥ is trivial for this basis"))?,
            };
            construct_breakdown_guess(&p.a, &p.b, u, &c).map_err(build_err)?
        }
    };
    if let Some(scale) = g.perturbation_scale {
        let e = random_complex_matrix(p.dim(), 1, &mut seeded_rng(g.perturbation_seed)).column(0);
        x0 = x0.add(&e.scaled(re(scale)));
    }
    Ok(x0)
}

impl ExperimentSpec {
    pub fn setup(&self) -> Result<Setup, SpecError> {
        let problem = build_problem(&self.problem)?;
        let u = match &self.deflation {
            Some(d) => Some(build_basis(d, &problem)?),
            None => None,
        };
        let x0 = match &self.initial_guess {
            Some(g) => build_guess(g, &problem, u.as_ref())?,
            None => problem.x0.clone(),
        };
        Ok(Setup { problem, u, x0 })
    }
}
