//! Command-line front end for `srcd-core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod functions;
pub mod json;
pub mod structure_file;
pub mod text;

pub use commands::{run, Outcome};
pub use error::CliError;

/// The report in the requested format.
pub fn render(outcome: &Outcome, text: bool) -> String {
    if text {
        text::render_text(&outcome.report)
    } else {
        json::to_json_string(&outcome.report)
    }
}

/// Sizes the global rayon pool from `SRCD_THREADS` (unset or 0 means automatic).
pub fn configure_threads() -> Result<(), CliError> {
    let n = match std::env::var("SRCD_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("SRCD_THREADS must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}
