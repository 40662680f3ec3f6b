use std::process::ExitCode;

use clap::Parser;
use scorecard::cli::{error_line, run, summary_line, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(body) => {
            println!("{}", summary_line(name, body));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_line(name, &e));
            ExitCode::from(1)
        }
    }
}
