use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dkrylov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dkrylov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn experiments() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

const TOY: &str = r#"
variants = ["rminres_deflation_only", "deflated_gmres", "deflated_minres_breakdown_free"]

[problem]
generator = "toy_breakdown_2x2"

[deflation]
generated = true
"#;

#[test]
fn toy_run_reports_breakdown_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "toy.toml", TOY);
    let csv = dir.path().join("out.csv");
    let out = dkrylov(&["run", &spec, "--output", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("variant,iteration,rel_residual_original,rel_residual_deflated,status")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let last = |v: &str| rows.iter().filter(|r| r[0] == v).last().unwrap().clone();
    assert_eq!(last("rminres_deflation_only")[4], "breakdown@1");
    assert_eq!(last("deflated_gmres")[4], "breakdown@1");
    assert_eq!(last("deflated_minres_breakdown_free")[4], "converged");
    assert_eq!(rows[0][2], "1.0000000000000000e0");
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "r.toml",
        r#"
variants = ["plain_minres", "rminres_explicit", "deflated_gmres"]
[problem]
generator = "random_hermitian"
n = 40
k = 3
seed = 11
[deflation]
generated = true
"#,
    );
    let a = dkrylov(&["run", &spec]);
    let b = dkrylov(&["run", &spec]);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let c = dkrylov(&["run", &spec, "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn evals_experiment_curves_coincide() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("evals.json");
    let spec = experiments().join("evals.toml");
    let out = dkrylov(&["run", spec.to_str().unwrap(), "--format", "json", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let variants = value["variants"].as_array().unwrap();
    assert_eq!(variants.len(), 4);
    let curve = |i: usize| -> Vec<f64> {
        variants[i]["rel_residual_original"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect()
    };
    let (c1, c2, c3) = (curve(1), curve(2), curve(3));
    assert_eq!(c1.len(), c2.len());
    assert_eq!(c1.len(), c3.len());
    for i in 0..c1.len() {
        assert!((c1[i] - c2[i]).abs() <= 1e-8 && (c1[i] - c3[i]).abs() <= 1e-8, "iteration {i}");
    }
    assert!(curve(0).len() > c1.len());
}

#[test]
fn spec_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let unknown = write(&dir, "u.toml", &format!("{TOY}\n[solver]\ntolerance = 1e-8\n"));
    assert_eq!(dkrylov(&["run", &unknown]).status.code(), Some(2));
    let variant = write(&dir, "v.toml", &TOY.replace("deflated_gmres", "bicgstab"));
    assert_eq!(dkrylov(&["run", &variant]).status.code(), Some(2));
    let zero = write(
        &dir,
        "z.toml",
        "variants = [\"rminres_explicit\"]\n[problem]\ngenerator = \"indefinite_spectrum\"\nm = 5\n[deflation]\neigen = [0]\n",
    );
    assert_eq!(dkrylov(&["run", &zero]).status.code(), Some(2));
    assert_eq!(dkrylov(&["run", "/nonexistent/spec.toml"]).status.code(), Some(2));
    assert_eq!(dkrylov(&["run", &write(&dir, "t.toml", TOY), "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn construction_errors_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let out_of_range = write(
        &dir,
        "o.toml",
        "variants = [\"rminres_explicit\"]\n[problem]\ngenerator = \"indefinite_spectrum\"\nm = 5\n[deflation]\neigen = [11]\n",
    );
    assert_eq!(dkrylov(&["run", &out_of_range]).status.code(), Some(3));
    // deflated CG needs a positive definite A
    let mode = write(&dir, "m.toml", &TOY.replace("\"deflated_gmres\", ", "\"deflated_cg\", "));
    assert_eq!(dkrylov(&["run", &mode]).status.code(), Some(3));
    let no_basis = write(
        &dir,
        "n.toml",
        "variants = [\"rminres_explicit\"]\n[problem]\ngenerator = \"indefinite_spectrum\"\nm = 5\n",
    );
    assert_eq!(dkrylov(&["run", &no_basis]).status.code(), Some(3));
}

#[test]
fn diagnose_reports_the_angle() {
    let dir = TempDir::new().unwrap();
    let toy = write(&dir, "toy.toml", TOY);
    let out = dkrylov(&["diagnose", &toy]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["intersection_nontrivial"], true);
    assert!((v["largest_principal_angle_deg"].as_f64().unwrap() - 90.0).abs() < 1e-8);

    let invariant = write(
        &dir,
        "inv.toml",
        "[problem]\ngenerator = \"indefinite_spectrum\"\nm = 10\nseed = 1\n[deflation]\neigen = [1, 11]\n",
    );
    let v = json(&dkrylov(&["diagnose", &invariant]));
    assert_eq!(v["intersection_nontrivial"], false);
    assert!(v["largest_principal_angle_deg"].as_f64().unwrap() < 1e-6);

    let break1 = experiments().join("break1.toml");
    let v = json(&dkrylov(&["diagnose", break1.to_str().unwrap()]));
    assert_eq!(v["intersection_nontrivial"], true);
}

#[test]
fn matrix_market_inputs() {
    let dir = TempDir::new().unwrap();
    write(&dir, "a.mtx", "%%MatrixMarket matrix array real symmetric\n2 2\n0\n1\n0\n");
    write(&dir, "b.mtx", "%%MatrixMarket matrix array real general\n2 1\n1\n0\n");
    write(&dir, "u.mtx", "%%MatrixMarket matrix array real general\n2 1\n1\n0\n");
    let spec = write(
        &dir,
        "mm.toml",
        r#"
variants = ["deflated_gmres"]
[problem]
generator = "matrix_market"
a = "a.mtx"
b = "b.mtx"
[deflation]
file = "u.mtx"
[output]
format = "json"
"#,
    );
    let out = dkrylov(&["run", &spec]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["variants"][0]["status"], "breakdown@1");
}

#[test]
fn check_suites_pass() {
    for suite in ["projections", "equivalence", "spectrum", "breakdown"] {
        let out = dkrylov(&["check", suite, "--seed", "5"]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stdout));
        let v = json(&out);
        assert_eq!(v["suite"], suite);
        assert_eq!(v["passed"], true);
        for inv in v["invariants"].as_array().unwrap() {
            assert!(inv["instances"].as_u64().unwrap() > 0, "{suite}: {inv}");
        }
    }
    assert_ne!(dkrylov(&["check", "nonsense"]).status.code(), Some(0));
}
