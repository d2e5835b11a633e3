mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{Cli, Command};
use commands::{Failure, Outcome};

fn emit<T: Serialize>(cli: &Cli, doc: &T) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Failure::Usage(e.to_string()))?;
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Usage(e.to_string())),
            _ => Ok(()),
        },
    }
}

fn dispatch(cli: &Cli) -> Outcome<bool> {
    match &cli.command {
        Command::Series => emit(cli, &commands::series(cli)?)?,
        Command::Integral => emit(cli, &commands::integral(cli)?)?,
        Command::Expansion => emit(cli, &commands::expansion(cli)?)?,
        Command::Decompose => emit(cli, &commands::decompose(cli)?)?,
        Command::Restrict => emit(cli, &commands::restrict(cli)?)?,
        Command::Verify { suite } => {
            let doc = commands::run_verify(cli, suite)?;
            emit(cli, &doc)?;
            return Ok(doc.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("gkz: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
