use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use compulse::{execute, Cli, CliError};

fn run(cli: &Cli) -> Result<i32, CliError> {
    // open the destination first so an unwritable path fails before any work
    let file = cli
        .out
        .as_ref()
        .map(|path| File::create(path).map_err(|source| CliError::Output { path: path.clone(), source }))
        .transpose()?;
    let outcome = execute(cli)?;
    match (file, &cli.out) {
        (Some(mut f), Some(path)) => f
            .write_all(outcome.text.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|source| CliError::Output { path: path.clone(), source })?,
        _ => io::stdout()
            .write_all(outcome.text.as_bytes())
            .map_err(|source| CliError::Output { path: "<stdout>".into(), source })?,
    }
    if outcome.exit_code != 0 && cli.out.is_some() {
        // the failure dump is in the file; repeat the verdict on stderr
        eprintln!("verification failed; see {}", cli.out.as_ref().unwrap().display());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("compulse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
