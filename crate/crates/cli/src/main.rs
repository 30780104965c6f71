use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;

use args::Cli;

/// Usage and input errors (sysexits `EX_USAGE`).
const EXIT_USAGE: u8 = 64;
/// Failure writing the report (sysexits `EX_IOERR`).
const EXIT_IO: u8 = 74;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<std::io::Error>().is_some() {
                ExitCode::from(EXIT_IO)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
