use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = tc_cli::Cli::parse();
    match tc_cli::run(&cli) {
        Ok(manifest) => {
            println!(
                "{}: wrote {} files and manifest.json",
                manifest.command,
                manifest.files.len()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
