use clap::{Args, Parser, Subcommand};
use krein_bie_cli::config::{ConfigError, RunConfig};
use krein_bie_cli::report::{write_json, OutputPaths, Report};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

/// Boundary-integral Krein resolvent toolkit for -Δ + V0 in the plane.
#[derive(Parser)]
#[command(name = "kreinbie", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every registered invariant and write a pass/fail report.
    Verify(RunArgs),
    /// Scan σ_min over an energy interval and refine the spectral hits.
    Eig(RunArgs),
    /// Tabulate the perturbed Green function on a rectangle.
    Green(RunArgs),
    /// Far-field sweep for plane-wave scattering.
    Scatter(RunArgs),
    /// Singular-value decay of the resolvent difference.
    Svd(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path of the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ErrorPayload {
    error: ErrorBody,
}

#[derive(Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (expected, args) = match &cli.command {
        Command::Verify(a) => ("verify", a),
        Command::Eig(a) => ("eig", a),
        Command::Green(a) => ("green", a),
        Command::Scatter(a) => ("scatter", a),
        Command::Svd(a) => ("svd", a),
    };

    let config = match RunConfig::from_path(&args.config) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if config.task.kind() != expected {
        let e = ConfigError::TaskMismatch {
            expected: expected.to_owned(),
            found: config.task.kind().to_owned(),
        };
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    let paths = OutputPaths::resolve(&config, args.out.as_deref());
    if let Some(dir) = paths.json.parent() {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return ExitCode::from(3);
        }
    }

    match krein_bie_cli::tasks::run(&config, &paths) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            // leave a machine-readable trace next to where the artifacts
            // would have gone, then fail with the contract's exit code
            let report = Report {
                task: config.task.kind(),
                config: &config,
                payload: ErrorPayload {
                    error: ErrorBody {
                        code: e.machine_code(),
                        message: e.to_string(),
                    },
                },
            };
            let _ = write_json(&paths.json, &report);
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
