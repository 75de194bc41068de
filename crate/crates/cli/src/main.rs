mod config;
mod error;
mod kernel;
mod report;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::error::{exit, CliError, CliResult};

/// Fiber decompositions, decay bounds, operator functions and the identity
/// checks for coarse-periodic lattice operators.
#[derive(Debug, Parser)]
#[command(name = "blochlat", version)]
struct Args {
    /// Job configuration (TOML with [lattice], [kernel], [task], [params]).
    #[arg(long)]
    config: PathBuf,
    /// Directory for summary.json and CSV output.
    #[arg(long, default_value = "blochlat_output")]
    output: PathBuf,
    /// Overrides params.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Timing on stderr and elapsed_ms in the summary.
    #[arg(long)]
    verbose: bool,
}

fn run(args: &Args) -> CliResult<u8> {
    let start = Instant::now();
    let job = config::load(&args.config, args.seed)?;
    if args.verbose {
        eprintln!("task {:?} on {:?}, seed {}", job.task, job.spec, job.seed);
        if let Some(c) = &job.contour {
            eprintln!("contour: {}", tasks::describe(c));
        }
    }
    std::fs::create_dir_all(&args.output).map_err(|e| CliError::io("create directory", &args.output, e))?;
    let checks = tasks::run(&job, &args.output)?;
    for c in &checks {
        println!("{}", report::line(c));
    }
    let elapsed = args.verbose.then(|| start.elapsed().as_millis() as u64);
    let path = report::write_summary(&args.output, &checks, elapsed)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    if args.verbose {
        eprintln!(
            "{} checks, {failed} failed, {} ms; summary in {}",
            checks.len(),
            elapsed.unwrap_or(0),
            path.display()
        );
    }
    Ok(if failed == 0 { exit::OK } else { exit::CHECK_FAILED })
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
