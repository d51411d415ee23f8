use clap::Parser;
use std::process::ExitCode;
use syz_cli::commands::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = execute(&cli);
    let text = report.render();
    if let Some(path) = &cli.json_out {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    print!("{text}");
    ExitCode::from(report.status.exit_code() as u8)
}
