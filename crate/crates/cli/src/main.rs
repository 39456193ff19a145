//! `aeqs`: decide, trace, verify and compile AEQS instances from the command line.

mod report;
mod target;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use aeqs_core::aeqs::{self, minimum_gap, AeqsError, Outcome};
use aeqs_core::doc::{DocError, HamiltonianDoc, SCHEMA_VERSION};
use aeqs_core::evolve::{evolve_trace, EvolveError, EvolveSettings, Method, Schedule, StepPolicy};
use aeqs_core::gallery::{self, Bounds, GalleryError};
use aeqs_core::linalg::EigenSettings;

use report::{basis_schema, CompileReport, GalleryListing, GapReport, RunReport, VerdictFields, VerifyOut};
use target::Target;

/// Exit code for usage errors; 0..=2 carry verdicts.
const EXIT_USAGE: u8 = 3;
const EXIT_ERROR: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Document { path: String, source: DocError },
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error(transparent)]
    Aeqs(#[from] AeqsError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error("{0}")]
    Usage(String),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "aeqs", version, about = "Adiabatic evolutionary quantum systems: decide, trace, verify, compile")]
struct Cli {
    /// Seed for the Lanczos start vector.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide one input from the ground state of H_fin.
    Run {
        /// Gallery entry name or machine document path.
        target: String,
        input: String,
        #[arg(long)]
        json: bool,
    },
    /// Simulate the adiabatic evolution and print per-step records.
    Trace {
        target: String,
        input: String,
        #[arg(long = "T")]
        t: f64,
        /// Number of steps; defaults to max(64, ceil(T^3)).
        #[arg(long = "R")]
        r: Option<usize>,
        #[arg(long, default_value = "midpoint")]
        method: Method,
        #[arg(long, value_enum, default_value_t = TraceFormat::Csv)]
        format: TraceFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a gallery entry against its classical oracle.
    Verify {
        entry: String,
        #[arg(long, conflicts_with = "max_params", required_unless_present = "max_params")]
        max_len: Option<usize>,
        /// Parameter bounds such as "t<=3,k<=2,l<=2".
        #[arg(long)]
        max_params: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the Hamiltonian pair and criteria for one input as JSON.
    Compile {
        spec: String,
        input: String,
        #[arg(long, value_enum, default_value_t = Emit::Hamiltonians)]
        emit: Emit,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral gap of H_fin and the minimum gap along the interpolation.
    Gap {
        target: String,
        input: String,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        json: bool,
    },
    /// List the built-in gallery entries.
    GalleryList {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TraceFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Hamiltonians,
    Metadata,
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Accept => 0,
        Outcome::Reject => 1,
        Outcome::Indeterminate => 2,
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    let mut w = sink(out)?;
    let path = out.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
    writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|e| CliError::Io { path, source: e })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let mut eigen = EigenSettings::from_env();
    if let Some(seed) = cli.seed {
        eigen.lanczos_seed = seed;
    }
    match cli.command {
        Command::Run { target, input, json } => {
            let target = Target::resolve(&target)?;
            let started = Instant::now();
            let instance = target.family().build(&input)?;
            let verdict = aeqs::decide(&instance, &eigen)?;
            let report = RunReport {
                schema: SCHEMA_VERSION,
                target: target.name(),
                input: input.clone(),
                verdict: VerdictFields::from(&verdict),
                dimension: instance.dim(),
                qubits: instance.size,
                membership: target.membership(&input),
                tags: target.family().tags.clone(),
                elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            let text = if json { serde_json::to_string_pretty(&report)? } else { report.text() };
            write_text(&None, &text)?;
            Ok(outcome_code(verdict.outcome))
        }
        Command::Trace { target, input, t, r, method, format, out } => {
            let target = Target::resolve(&target)?;
            let instance = target.family().build(&input)?;
            let r = match r {
                Some(r) => r,
                None => StepPolicy::default().steps(t)?,
            };
            let settings = EvolveSettings { eigen, ..EvolveSettings::default() };
            let trace = evolve_trace(&instance, &Schedule::new(t, r)?, method, &settings)?;
            let path = out.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
            let mut w = sink(&out)?;
            match format {
                TraceFormat::Csv => trace.write_csv(&mut w)?,
                TraceFormat::Json => {
                    let mut value = serde_json::to_value(&trace)?;
                    value["schema"] = SCHEMA_VERSION.into();
                    serde_json::to_writer_pretty(&mut w, &value)?;
                    writeln!(w).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
                }
            }
            w.flush().map_err(|e| CliError::Io { path, source: e })?;
            eprintln!(
                "final overlap^2 {} (distance {}), T = {t}, R = {r}, method {method}",
                aeqs_core::numfmt::fmt_sig(trace.final_overlap_sq),
                aeqs_core::numfmt::fmt_sig(trace.final_distance)
            );
            Ok(0)
        }
        Command::Verify { entry, max_len, max_params, json, out } => {
            let bounds: Bounds = match (max_len, max_params) {
                (Some(n), None) => Bounds::MaxLen(n),
                (None, Some(s)) => s.parse()?,
                _ => return Err(CliError::Usage("give exactly one of --max-len and --max-params".into())),
            };
            let entry = gallery::build(&entry)?;
            let report = VerifyOut::from(&gallery::verify(&entry, &bounds, &eigen)?);
            let text = if json { serde_json::to_string_pretty(&report)? } else { report.text() };
            write_text(&out, &text)?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Compile { spec, input, emit, out } => {
            let target = Target::resolve(&spec)?;
            let instance = target.family().build(&input)?;
            let verdict = aeqs::decide(&instance, &eigen)?;
            let with_h = emit == Emit::Hamiltonians;
            let report = CompileReport {
                schema: SCHEMA_VERSION,
                target: target.name(),
                input,
                dimension: instance.dim(),
                qubits: instance.size,
                basis: basis_schema(&instance.basis),
                epsilon: instance.epsilon,
                accept: instance.accept.clone(),
                reject: instance.reject.clone(),
                verdict: VerdictFields::from(&verdict),
                h_ini: with_h.then(|| HamiltonianDoc::from(&instance.h_ini)),
                h_fin: with_h.then(|| HamiltonianDoc::from(&instance.h_fin)),
            };
            write_text(&out, &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::Gap { target, input, grid, json } => {
            let target = Target::resolve(&target)?;
            let instance = target.family().build(&input)?;
            let ground = aeqs::ground_state(&instance.h_fin, &eigen)?;
            let report = GapReport {
                schema: SCHEMA_VERSION,
                target: target.name(),
                input,
                ground_energy: ground.energy,
                spectral_gap: ground.gap(),
                grid,
                minimum_gap: minimum_gap(&instance, grid, &eigen)?,
            };
            let text = if json { serde_json::to_string_pretty(&report)? } else { report.text() };
            write_text(&None, &text)?;
            Ok(0)
        }
        Command::GalleryList { json } => {
            let mut listing = Vec::new();
            for name in gallery::NAMES {
                let e = gallery::build(name)?;
                listing.push(GalleryListing {
                    name: e.name.clone(),
                    alphabet: e.family.alphabet.iter().collect(),
                    orientation: format!("{:?}", e.orientation).to_lowercase(),
                    tags: e.family.tags.clone(),
                    notes: e.notes.clone(),
                });
            }
            let text = if json {
                serde_json::to_string_pretty(&serde_json::json!({ "schema": SCHEMA_VERSION, "entries": listing }))?
            } else {
                listing.iter().map(|l| format!("{:<14} {:<6} {}", l.name, l.alphabet, l.tags.join(","))).collect::<Vec<_>>().join("\n")
            };
            write_text(&None, &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
