//! `lft` command-line driver.

mod args;
mod config;
mod error;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{EXIT_OK, EXIT_VERIFICATION};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let (common, result) = match &cli.command {
        Command::Conjugate(a) => (&a.common, run::conjugate(a)),
        Command::Deform(a) => (&a.common, run::deform_verb(a)),
        Command::Diamond(a) => (&a.common, run::diamond(a)),
        Command::Verify(a) => (&a.common, run::verify(a)),
        Command::Divergence(a) => (&a.common, run::divergence(a)),
        Command::Plotdata(a) => (&a.common, run::plotdata(a)),
    };
    match result.and_then(|artifact| run::emit(common, &artifact).map(|_| artifact.ok)) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code)
        }
    }
}
