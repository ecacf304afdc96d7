mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use log::LevelFilter;

use args::Command;
use error::{trailer, CliError, Kind};

fn run(cli: args::Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    match &cli.command {
        Command::BuildNetwork(a) => commands::build_network(a),
        Command::Transitions(a) => commands::transitions(a),
        Command::Generate(a) => commands::generate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::SwitchProfile(a) => commands::switch_profile_cmd(a),
        Command::Fit(a) => commands::fit(a),
        Command::ExportPaths(a) => commands::export_paths(a),
    }
}

fn fail(kind: Kind) -> ExitCode {
    eprintln!("{}", trailer(kind));
    ExitCode::from(kind.exit_code() as u8)
}

fn main() -> ExitCode {
    let argv = match args::merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return fail(e.kind());
        }
    };
    let cli = match args::parse(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => fail(Kind::Usage),
            };
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            fail(e.kind())
        }
    }
}
