mod commands;
mod config;
mod error;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::SolveArgs;
use crate::config::Config;
use crate::error::{code, CliError};
use crate::report::{Failure, Report};

/// Detect, classify and solve complex-linearizable systems of two real
/// second-order ODEs.
#[derive(Parser)]
#[command(name = "complin", version)]
struct Cli {
    /// Config file (default: $COMPLIN_CONFIG, then ./complin.toml).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Print nothing on success.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cauchy-Riemann check, linearizability test and class label.
    Classify {
        file: PathBuf,
        /// Polynomial degree cap of the symmetry ansatz.
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Lie point symmetries, structure constants and brackets.
    Symmetries {
        file: PathBuf,
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Solve the complex ODE, invert on a grid and cross-check with RK4.
    Solve {
        file: PathBuf,
        /// Parameter bindings `name=value`, repeatable or comma-separated.
        #[arg(long = "param", short = 'p')]
        params: Vec<String>,
        /// `start:end:step`.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        series_order: Option<usize>,
        /// Disc radius on which the series tail is bounded.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        force_series: bool,
        /// Starting value of u at the first grid point.
        #[arg(long, allow_hyphen_values = true)]
        anchor: Option<String>,
        /// Trajectory CSV (default: <stem>.trajectory.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-check a stored trajectory against a fresh RK4 integration.
    Verify {
        file: PathBuf,
        /// Report written by `solve --report`.
        #[arg(long)]
        solution: PathBuf,
        /// Expected grid of the stored trajectory.
        #[arg(long)]
        grid: Option<String>,
        /// Residual CSV (default: <stem>.residuals.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Geometry of the two real planes of c1 z1 + c2 z2 = 0 in R^4.
    PlotPlanes {
        /// `c1,c2,c3,c4`.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long, default_value = "planes.json")]
        out: PathBuf,
    },
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    let (cfg, _) = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Classify { file, degree } => commands::classify_cmd(file, *degree, &cfg),
        Command::Symmetries { file, degree } => commands::symmetries_cmd(file, *degree, &cfg),
        Command::Solve { file, params, grid, series_order, radius, force_series, anchor, csv } => commands::solve_cmd(
            SolveArgs {
                file,
                params,
                grid,
                series_order: *series_order,
                radius: *radius,
                force_series: *force_series,
                anchor: anchor.as_deref(),
                csv: csv.clone(),
            },
            &cfg,
        ),
        Command::Verify { file, solution, grid, csv } => commands::verify_cmd(file, solution, grid.as_deref(), csv.clone(), &cfg),
        Command::PlotPlanes { coeffs, out } => commands::plot_planes_cmd(coeffs, out),
    }
}

fn emit(cli: &Cli, report: &Report, show: bool) -> Result<(), CliError> {
    let json = report.to_json().map_err(|e| CliError::internal(e.to_string()))?;
    if let Some(p) = &cli.report {
        std::fs::write(p, &json).map_err(|e| CliError::internal(format!("cannot write {}: {e}", p.display())))?;
    }
    if show {
        let text = if cli.json { json } else { report.render_text() };
        let _ = std::io::stdout().write_all(text.as_bytes());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, failure) = match dispatch(&cli) {
        Ok(r) => (Some(r), None),
        Err(mut e) => {
            let report = e.report.take().map(|b| {
                let mut r = *b;
                r.error = Some(Failure { exit_code: e.code, message: e.message.clone() });
                r
            });
            (report, Some(e))
        }
    };
    let mut status = failure.as_ref().map_or(code::OK, |e| e.code);
    if let Some(r) = &report {
        if let Err(e) = emit(&cli, r, !cli.quiet || failure.is_some()) {
            eprintln!("error: {e}");
            status = status.max(e.code);
        }
    }
    if let Some(e) = failure {
        eprintln!("error: {e}");
    }
    ExitCode::from(status)
}
