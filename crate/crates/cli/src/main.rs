use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use condexp_cli::{parse_scenario, run, run_demo, CliError, Report, RunOptions};

#[derive(Parser)]
#[command(
    name = "condexp",
    version,
    about = "Conditional sublinear and convex expectations on finite spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and print its report.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Threshold for pass/fail flags in the report.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Seed for random probe payoffs and points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Run a named demo with its default parameters.
    Demo {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the demo names, one per line.
    ListDemos,
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = report.render();
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn status(ok: bool, message: &str) {
    let stderr = std::io::stderr();
    let color = std::env::var_os("NO_COLOR").is_none() && stderr.is_terminal();
    let (tag, code) = if ok { ("ok", "32") } else { ("error", "31") };
    let tag = if color {
        format!("\x1b[{code}m{tag}\x1b[0m")
    } else {
        tag.to_string()
    };
    let _ = writeln!(stderr.lock(), "{tag}: {message}");
}

fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Cmd::Run {
            scenario,
            out,
            tol,
            seed,
            threads,
        } => {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::Validation(format!(
                    "--tol must be a nonnegative number, got {tol}"
                )));
            }
            let text =
                std::fs::read_to_string(&scenario).map_err(|e| CliError::Io(format!("{}: {e}", scenario.display())))?;
            let parsed = parse_scenario(&text)?;
            let report = run(&parsed, &RunOptions { tol, seed, threads })?;
            emit(&report, out.as_ref())?;
            Ok(format!("{} {}", parsed.doc.command.op(), scenario.display()))
        }
        Cmd::Demo { name, out } => {
            let report = run_demo(&name, &RunOptions::default())?;
            emit(&report, out.as_ref())?;
            let pass = report.outputs()["pass"].as_bool().unwrap_or(false);
            Ok(format!(
                "demo {name} ({})",
                if pass { "targets met" } else { "targets missed" }
            ))
        }
        Cmd::ListDemos => {
            let mut stdout = std::io::stdout().lock();
            for name in condexp::demos::DEMO_NAMES {
                writeln!(stdout, "{name}").map_err(|e| CliError::Io(e.to_string()))?;
            }
            Ok("list-demos".into())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(message) => {
            status(true, &message);
            ExitCode::SUCCESS
        }
        Err(e) => {
            status(false, &e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
