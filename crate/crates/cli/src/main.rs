mod args;
mod commands;
mod config;
mod error;
mod grid;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Format};
use error::CliError;

fn parse(mut argv: Vec<OsString>) -> Result<Cli, CliError> {
    let mut cmd = Cli::command();
    cmd.build();
    let usage = |e: clap::Error| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => e.exit(),
        _ => CliError::Usage(e.render().to_string().trim().to_string()),
    };
    // First pass only finds the config file and what is already set, so
    // flags the config will supply may still be missing.
    let matches = cmd
        .clone()
        .ignore_errors(true)
        .try_get_matches_from(&argv)
        .map_err(usage)?;
    let config_path = matches
        .subcommand()
        .and_then(|(_, sub)| sub.try_get_one::<std::path::PathBuf>("config").ok().flatten())
        .or_else(|| matches.try_get_one::<std::path::PathBuf>("config").ok().flatten())
        .cloned();
    if let (Some(path), Some(_)) = (&config_path, matches.subcommand()) {
        let entries = config::read(path)?;
        argv.extend(config::overrides(
            &cmd,
            &matches,
            &entries,
            &path.display().to_string(),
        )?);
    }
    let matches = cmd.try_get_matches_from(&argv).map_err(usage)?;
    Cli::from_arg_matches(&matches).map_err(usage)
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let cli = parse(argv)?;
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let report = commands::run(&cli.global, &cli.command)?;
    let text = match cli.global.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &cli.global.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
