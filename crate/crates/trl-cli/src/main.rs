use std::process::ExitCode;

use clap::Parser;
use trl_cli::{run, Cli, Command, Format};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Command::Analyze(args) = cli.command;
    let report = match run(&args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(e) = &report.analysis_error {
        eprintln!("error: {e}");
    }
    match args.format {
        Format::Pretty => print!("{}", report.pretty()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    ExitCode::from(report.exit_code() as u8)
}
