use std::process::ExitCode;

use clap::Parser;
use dpmatch_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr());
    match run(&cli, &mut out, &mut err) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dpmatch: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
