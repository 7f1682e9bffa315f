use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use opnerve_cli::commands::{run, Cli};
use opnerve_cli::{EXIT_FAILED, EXIT_OK, EXIT_USAGE};

fn emit(path: Option<&std::path::Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => match writeln!(std::io::stdout(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK } as u8);
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let json = outcome.report.to_json();
    let written = match &outcome.artifact {
        // the artifact owns standard output when it has no file of its own
        Some((None, text)) => emit(None, text).and_then(|_| match &cli.report {
            Some(p) => emit(Some(p), &json),
            None => {
                eprintln!("{json}");
                Ok(())
            }
        }),
        Some((Some(out), text)) => {
            emit(Some(out), text).and_then(|_| emit(cli.report.as_deref(), &json))
        }
        None => emit(cli.report.as_deref(), &json),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    ExitCode::from(if outcome.report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    } as u8)
}
