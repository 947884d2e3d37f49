use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use srcd::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.command.common().clone();
    let result = srcd::configure_threads().and_then(|()| {
        let outcome = srcd::run(&cli.command)?;
        let rendered = srcd::render(&outcome, common.text);
        match &common.out {
            Some(path) => std::fs::write(path, rendered)?,
            None => std::io::stdout().write_all(rendered.as_bytes())?,
        }
        Ok(outcome.exit_code())
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("srcd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
