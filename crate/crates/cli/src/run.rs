use std::io::Write;
use std::thread;

use deflated_krylov::analysis::breakdown_condition;
use deflated_krylov::deflated::{initial_residual_norm, run_variant, DualReport, MethodVariant};
use deflated_krylov::projection::DeflatorOptions;
use deflated_krylov::solvers::SolveConfig;
use serde::Serialize;

use crate::spec::{Format, Setup, SpecError};

pub const CSV_HEADER: &str = "variant,iteration,rel_residual_original,rel_residual_deflated,status";

#[derive(Debug, Serialize)]
pub struct VariantRecord {
    pub variant: String,
    pub status: String,
    pub iterations: usize,
    pub rel_residual_original: Vec<f64>,
    pub rel_residual_deflated: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub problem: String,
    pub dimension: usize,
    pub deflation_dimension: usize,
    pub initial_residual_norm: f64,
    pub variants: Vec<VariantRecord>,
}

fn record(variant: MethodVariant, r: &DualReport, reference: f64) -> VariantRecord {
    VariantRecord {
        variant: variant.name().to_string(),
        status: r.status().to_string(),
        iterations: r.iterations(),
        rel_residual_original: r.relative_original(reference),
        rel_residual_deflated: r.relative_deflated(reference),
    }
}

/// Runs every variant on its own thread; results come back in spec order.
pub fn run_variants(
    setup: &Setup,
    variants: &[MethodVariant],
    cfg: &SolveConfig,
) -> Result<RunRecord, SpecError> {
    let p = &setup.problem;
    let reference = match initial_residual_norm(&p.a, &p.b, &setup.x0) {
        r if r > 0.0 => r,
        _ => 1.0,
    };
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = variants
            .iter()
            .map(|&v| {
                s.spawn(move || {
                    run_variant(v, &p.a, &p.b, &setup.x0, setup.u.as_ref(), DeflatorOptions::default(), cfg)
                        .map(|r| record(v, &r, reference))
                        .map_err(|e| SpecError::Build(format!("{v}: {e}")))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    Ok(RunRecord {
        problem: p.label.clone(),
        dimension: p.dim(),
        deflation_dimension: setup.u.as_ref().map_or(0, |u| u.cols()),
        initial_residual_norm: reference,
        variants: results.into_iter().collect::<Result<_, _>>()?,
    })
}

fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per (variant, iteration). Rows before the last carry `running`;
/// the last row carries the final status.
pub fn write_csv(run: &RunRecord, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for v in &run.variants {
        let n = v.rel_residual_original.len().max(v.rel_residual_deflated.len());
        for i in 0..n {
            let cell = |c: &[f64]| c.get(i).map_or_else(|| "nan".to_string(), |&x| csv_number(x));
            let status = if i + 1 == n { v.status.as_str() } else { "running" };
            writeln!(
                out,
                "{},{},{},{},{}",
                v.variant,
                i,
                cell(&v.rel_residual_original),
                cell(&v.rel_residual_deflated),
                status
            )?;
        }
    }
    Ok(())
}

pub fn write_run(run: &RunRecord, format: Format, out: &mut impl Write) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(run, out),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, run)?;
            writeln!(out)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DiagnosisRecord {
    pub problem: String,
    pub intersection_nontrivial: bool,
    /// Cosine of the largest principal angle between 𝒰 and A𝒰.
    pub indicator: f64,
    pub largest_principal_angle_rad: f64,
    pub largest_principal_angle_deg: f64,
}

pub fn diagnose(setup: &Setup) -> Result<DiagnosisRecord, SpecError> {
    let u = setup
        .u
        .as_ref()
        .ok_or_else(|| SpecError::Parse("diagnose needs a [deflation] section".into()))?;
    let d = breakdown_condition(&setup.problem.a, u).map_err(|e| SpecError::Build(e.to_string()))?;
    Ok(DiagnosisRecord {
        problem: setup.problem.label.clone(),
        intersection_nontrivial: d.intersection_nontrivial,
        indicator: d.smallest_singular_value,
        largest_principal_angle_rad: d.largest_principal_angle_rad,
        largest_principal_angle_deg: d.largest_principal_angle_deg(),
    })
}
