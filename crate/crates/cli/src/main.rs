mod args;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;

use args::{parse_args, Parsed};
use run::RunError;

fn threads_from_env() -> Result<Option<usize>, RunError> {
    match std::env::var("REPNUM_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| RunError::Usage(format!("REPNUM_THREADS must be a positive integer, got `{v}`"))),
        _ => Ok(None),
    }
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("{}", e.line());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let req = match parse_args(std::env::args_os()) {
        Parsed::Run(r) => r,
        Parsed::Clap(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    ExitCode::from(2)
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    fail(RunError::Usage(first.trim_start_matches("error: ").to_string()))
                }
            };
        }
        Parsed::Usage(u) => return fail(RunError::Usage(u.0)),
    };
    let exec = match threads_from_env() {
        Ok(t) => repnum::exec::configure_threads(t),
        Err(e) => return fail(e),
    };
    match run::run(&req, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
