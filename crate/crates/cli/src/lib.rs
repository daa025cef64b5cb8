//! `latstat`: batch experiments on arithmetic cut-and-project point sets.
//!
//! Subcommand dispatch, TOML configuration parsing, CSV/JSON/SVG emission,
//! seed management and run manifests. Exit codes: 0 success, 2 configuration
//! error, 3 resource-bound refusal.

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod csvout;
pub mod error;
pub mod manifest;
pub mod svg;

pub use error::CliError;

/// Runs the CLI on explicit arguments (`argv[0]` included) and returns the
/// process exit code. Each invocation installs its own rayon pool sized by
/// `--jobs`, so repeated in-process calls honour different worker counts.
pub fn run(argv: &[String]) -> i32 {
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("latstat: failed to build worker pool: {e}");
            return 2;
        }
    };
    match pool.install(|| commands::dispatch(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("latstat: {e}");
            e.exit_code()
        }
    }
}
