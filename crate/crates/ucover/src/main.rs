use std::process::ExitCode;

use clap::Parser;
use ucover::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_INVALID } else { cli::EXIT_OK });
        }
    };
    ExitCode::from(cli::run(cli))
}
