use std::process::ExitCode;

use clap::Parser;
use nehari_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.to_json());
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let CliError::Check { report, .. } = &err {
                print!("{}", report.to_json());
            }
            eprintln!("nehari: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
