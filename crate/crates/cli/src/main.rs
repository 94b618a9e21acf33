//! `dkrylov`: runs deflated Krylov experiments described in spec files,
//! seeded invariant suites and breakdown diagnoses.
//!
//! Exit codes: 0 success, 1 failed check, 2 spec parse error,
//! 3 construction error.

mod check;
mod run;
mod spec;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::check::{run_suite, Suite};
use crate::spec::{ExperimentSpec, Format, SpecError};

#[derive(Parser)]
#[command(name = "dkrylov", version, about = "Deflated Krylov solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write results here instead of the spec's output path or stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides the problem seed, or the suite seed for `check`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    maxit: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every variant of an experiment and write the residual histories.
    Run { spec: PathBuf },
    /// Run a seeded invariant suite and print a JSON report.
    Check {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Report whether U ∩ (AU)^⊥ is nontrivial for the spec's basis.
    Diagnose { spec: PathBuf },
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_BUILD: u8 = 3;

fn fail(e: &SpecError) -> ExitCode {
    eprintln!("dkrylov: {e}");
    ExitCode::from(match e {
        SpecError::Parse(_) => EXIT_PARSE,
        SpecError::Build(_) => EXIT_BUILD,
    })
}

fn open_output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(cli: &Cli, path: &PathBuf) -> Result<ExperimentSpec, SpecError> {
    let mut spec = ExperimentSpec::load(path)?;
    if let Some(seed) = cli.seed {
        spec.problem.seed = seed;
    }
    if let Some(tol) = cli.tol {
        spec.solver.tol = Some(tol);
    }
    if let Some(maxit) = cli.maxit {
        spec.solver.max_iterations = Some(maxit);
    }
    spec.solve_config()
        .validate()
        .map_err(|e| SpecError::Parse(e.to_string()))?;
    Ok(spec)
}

fn write_json(value: &impl serde::Serialize, path: Option<&PathBuf>) -> io::Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()
}

fn cmd_run(cli: &Cli, path: &PathBuf) -> Result<(), SpecError> {
    let spec = load(cli, path)?;
    let variants = spec.parsed_variants()?;
    if variants.is_empty() {
        return Err(SpecError::Parse("no variants listed".into()));
    }
    let setup = spec.setup()?;
    let run = run::run_variants(&setup, &variants, &spec.solve_config())?;
    let format = cli.format.unwrap_or(spec.output.format);
    let target = cli.output.as_ref().or(spec.output.path.as_ref());
    let io_err = |e: io::Error| SpecError::Build(format!("writing output: {e}"));
    let mut out = open_output(target).map_err(io_err)?;
    run::write_run(&run, format, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    for v in &run.variants {
        eprintln!("{:<32} {:>6} iterations  {}", v.variant, v.iterations, v.status);
    }
    Ok(())
}

fn cmd_diagnose(cli: &Cli, path: &PathBuf) -> Result<(), SpecError> {
    let spec = load(cli, path)?;
    let setup = spec.setup()?;
    let record = run::diagnose(&setup)?;
    write_json(&record, cli.output.as_ref()).map_err(|e| SpecError::Build(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { spec } => match cmd_run(&cli, spec) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e),
        },
        Command::Diagnose { spec } => match cmd_diagnose(&cli, spec) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e),
        },
        Command::Check { suite } => {
            let report = match run_suite(*suite, cli.seed.unwrap_or(0)) {
                Ok(r) => r,
                Err(e) => return fail(&SpecError::Build(e.to_string())),
            };
            if let Err(e) = write_json(&report, cli.output.as_ref()) {
                return fail(&SpecError::Build(e.to_string()));
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
    }
}
