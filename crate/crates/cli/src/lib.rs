//! Command-line front end: run specifications, command execution and
//! CSV / JSON artifacts.

pub mod error;
pub mod output;
pub mod run;
pub mod spec;
pub mod tables;

pub use error::CliError;
pub use output::{Artifact, Cell};
pub use run::{execute, Outcome};
pub use spec::{Cli, CommandName, Format, MethodName, RunSpec};
pub use tables::TableId;

/// Configure the global thread pool from `GTFK_NUM_THREADS` if set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GTFK_NUM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("GTFK_NUM_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(e.to_string()))
}

/// Run one command end to end and return the process exit code.
pub fn run_cli(cli: Cli) -> i32 {
    let result = init_threads()
        .and_then(|_| RunSpec::from_cli(cli))
        .and_then(|spec| {
            let outcome = execute(&spec)?;
            outcome.artifact.write(spec.out.as_deref(), spec.format)?;
            if outcome.breaches.is_empty() {
                Ok(())
            } else {
                for b in &outcome.breaches {
                    eprintln!("{b}");
                }
                Err(CliError::Tolerance(format!("{} row check(s) failed", outcome.breaches.len())))
            }
        });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}
