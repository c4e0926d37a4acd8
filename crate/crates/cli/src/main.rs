mod commands;
mod manifest;
mod sources;

use std::process::ExitCode;

use clap::Parser;

use crate::commands::Cli;

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    match commands::run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let numerical = e
        .chain()
        .find_map(|c| c.downcast_ref::<routentry::Error>())
        .is_some_and(routentry::Error::is_numerical);
    if numerical {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}
