use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use weaversim_cli::{error_json, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    match run(&cli.command, &mut stdout) {
        Ok(outcome) => {
            for path in &outcome.written {
                if writeln!(stdout, "wrote {}", path.display()).is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", error_json(&err));
            ExitCode::FAILURE
        }
    }
}
