mod args;
mod commands;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command, Experiment};
use commands::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");

    let result = match &cli.command {
        Command::Analyze { data, output } => {
            commands::analyze(echo, data).and_then(|d| commands::emit(&d, output))
        }
        Command::Evaluate {
            data,
            prediction,
            no_round,
            output,
        } => commands::evaluate(echo, data, prediction.as_deref(), *no_round)
            .and_then(|d| commands::emit(&d, output)),
        Command::Simulate { experiment } => match experiment {
            Experiment::Table1 { sim, output } => {
                commands::table1(echo, sim).and_then(|d| commands::emit(&d, output))
            }
            Experiment::CccCheck {
                sim,
                points_out,
                output,
            } => commands::ccc_check(echo, sim, points_out.as_deref())
                .and_then(|d| commands::emit(&d, output)),
        },
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => {
                    eprintln!("error: {msg}\n");
                    let _ = Cli::command().print_help();
                }
                Failure::Data(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
