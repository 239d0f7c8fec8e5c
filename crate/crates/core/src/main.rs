use std::io::{self, Write};
use std::process::ExitCode;

use tribell::cli::{self, CliError};

fn main() -> ExitCode {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli::run(std::env::args_os(), &mut out) {
        Ok(()) => {
            let _ = out.flush();
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(e)) => e.exit(),
        Err(e) => {
            let _ = out.flush();
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
