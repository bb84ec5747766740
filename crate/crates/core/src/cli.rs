//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O or format error, 4 degenerate
//! image, 5 node ordering failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::imageio::{self, PgmFormat};
use crate::nodesolver::{self, NodeSolverConfig, SolverError, SolverWarning};
use crate::pipeline::{self, EnhanceConfig, EnhanceReport};
use crate::{Error, GrayImage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;
pub const EXIT_NODE_ORDER: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "polygray",
    version,
    about = "Gray-level enhancement with polygonal point transforms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enhance a PGM image and write the result as raw PGM.
    Enhance {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write a JSON report with nodes, targets, coefficients and convergence data.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the sampled transfer function as CSV.
        #[arg(long)]
        function_csv: Option<PathBuf>,
        /// Write the input histogram as CSV.
        #[arg(long)]
        histogram_csv: Option<PathBuf>,
        /// Number of evenly spaced samples in the function CSV.
        #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(2..))]
        samples: u64,
    },
    /// Print the solved interpolation nodes as JSON.
    Nodes {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Print the sampled transfer function as CSV.
    Function {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(2..))]
        samples: u64,
    },
    /// Print the gray-level histogram as CSV.
    Histogram { input: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Number of interpolation nodes, endpoints included.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    /// Stop when no node moves by this many gray levels or more.
    #[arg(long, default_value_t = 0.5, value_parser = parse_epsilon)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iterations: u64,
}

impl SolverArgs {
    fn enhance_config(&self) -> EnhanceConfig {
        EnhanceConfig {
            n: self.n as usize,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations as usize,
            output_max: None,
        }
    }

    fn solver_config(&self) -> NodeSolverConfig {
        NodeSolverConfig {
            n: self.n as usize,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations as usize,
            initial_interior_nodes: None,
        }
    }
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    let value: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(format!("epsilon must be a positive number, got {s}"))
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Pnm(_) | Error::Image(_) => EXIT_IO,
        Error::Solver(SolverError::ConstantImage(_))
        | Error::Solver(SolverError::TooFewDistinctLevels { .. })
        | Error::Solver(SolverError::DegenerateRange(_)) => EXIT_DEGENERATE,
        Error::Solver(SolverError::InvalidConfig(_)) => EXIT_USAGE,
        Error::Solver(_) | Error::Curve(_) => EXIT_NODE_ORDER,
    }
}

/// Flat view of an [`EnhanceReport`] as written by `enhance --report`.
#[derive(Debug, Serialize)]
pub struct ReportJson<'a> {
    pub width: usize,
    pub height: usize,
    pub max_level: u16,
    pub nodes: &'a [f64],
    pub targets: &'a [f64],
    pub coefficients: &'a [f64],
    pub iterations: usize,
    pub converged: bool,
    pub warnings: &'a [SolverWarning],
    pub trace: &'a [Vec<f64>],
    pub lut_checksum: String,
}

impl<'a> ReportJson<'a> {
    pub fn new(image: &GrayImage, report: &'a EnhanceReport) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
            max_level: image.max_level(),
            nodes: report.function.nodes().as_slice(),
            targets: report.function.values().as_slice(),
            coefficients: report.function.coeffs(),
            iterations: report.node_result.iterations,
            converged: report.node_result.converged,
            warnings: &report.node_result.warnings,
            trace: &report.node_result.trace,
            lut_checksum: format!("{:016x}", report.lut_checksum),
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "polygray: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), Error> {
    match command {
        Command::Enhance {
            input,
            output,
            solver,
            report,
            function_csv,
            histogram_csv,
            samples,
        } => {
            let image = load(&input)?;
            let (enhanced, enhance_report) = pipeline::enhance(&image, &solver.enhance_config())?;
            log::debug!("timings: {:?}", enhance_report.timing);

            // render everything before touching the filesystem
            let mut outputs = vec![(output, imageio::write_pgm(&enhanced, PgmFormat::Binary))];
            if let Some(path) = report {
                outputs.push((path, report_json(&image, &enhance_report)));
            }
            if let Some(path) = function_csv {
                let csv = imageio::export_function_csv(
                    &enhance_report.function,
                    samples as usize,
                    f64::from(image.max_level()),
                );
                outputs.push((path, csv.into_bytes()));
            }
            if let Some(path) = histogram_csv {
                let csv = imageio::export_histogram_csv(&image.histogram());
                outputs.push((path, csv.into_bytes()));
            }
            for (path, bytes) in outputs {
                write_atomic(&path, &bytes)?;
            }
            Ok(())
        }
        Command::Nodes { input, solver } => {
            let image = load(&input)?;
            let result = nodesolver::solve_nodes(&image, &solver.solver_config())?;
            let mut json = serde_json::to_string_pretty(&result).expect("serializable result");
            json.push('\n');
            emit(stdout, json.as_bytes())
        }
        Command::Function {
            input,
            solver,
            samples,
        } => {
            let image = load(&input)?;
            let (function, _) = pipeline::build_transform(&image, &solver.enhance_config())?;
            let csv = imageio::export_function_csv(
                &function,
                samples as usize,
                f64::from(image.max_level()),
            );
            emit(stdout, csv.as_bytes())
        }
        Command::Histogram { input } => {
            let image = load(&input)?;
            let csv = imageio::export_histogram_csv(&image.histogram());
            emit(stdout, csv.as_bytes())
        }
    }
}

pub fn report_json(image: &GrayImage, report: &EnhanceReport) -> Vec<u8> {
    let mut json =
        serde_json::to_string_pretty(&ReportJson::new(image, report)).expect("serializable report");
    json.push('\n');
    json.into_bytes()
}

fn load(path: &Path) -> Result<GrayImage, Error> {
    let bytes = fs::read(path).map_err(|source| io_error(path, source))?;
    Ok(imageio::read_pgm(&bytes)?)
}

fn emit(stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), Error> {
    stdout
        .write_all(bytes)
        .and_then(|()| stdout.flush())
        .map_err(|source| io_error(Path::new("<stdout>"), source))
}

/// Writes through a temporary file in the target directory, then renames it
/// into place, so a failed run never leaves a partial file behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|source| io_error(path, source))?;
    tmp.write_all(bytes)
        .and_then(|()| tmp.flush())
        .map_err(|source| io_error(path, source))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}
