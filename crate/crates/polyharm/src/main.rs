use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use polyharm::cli::{Cli, Command};
use polyharm::commands;
use polyharm::{config, Failure, EXIT_IO, EXIT_USAGE};

fn parse() -> Result<Cli, i32> {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::config_path(&argv) {
        Some(path) => match config::load(path.as_ref()) {
            Ok(extra) => config::splice(&argv, &Command::NAMES, extra),
            Err(e) => {
                eprintln!("polyharm: config: {e}");
                return Err(if e.kind() == std::io::ErrorKind::InvalidData { EXIT_USAGE } else { EXIT_IO });
            }
        },
        None => argv,
    };
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            EXIT_USAGE
        } else {
            0
        }
    })
}

fn main() -> ExitCode {
    let cli = match parse() {
        Ok(c) => c,
        Err(code) => return ExitCode::from(code as u8),
    };
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("polyharm: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(note) = &report.note {
        eprint!("{note}");
    }
    let text = report.render(cli.format);
    let written = match &cli.out {
        Some(path) => fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("polyharm: {}", Failure::Io(e));
        return ExitCode::from(EXIT_IO as u8);
    }
    if !report.failed.is_empty() {
        let f = Failure::Criteria(report.failed);
        eprintln!("polyharm: {f}");
        return ExitCode::from(f.exit_code() as u8);
    }
    ExitCode::SUCCESS
}
