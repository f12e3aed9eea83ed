use std::process::ExitCode;

use clap::Parser;
use krc_cli::{commands, render_text, Cli};

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("KRC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("KRC_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let json = cli.command.common().json;
    match commands::run(&cli.command, argv) {
        Ok(outcome) => {
            if json {
                for w in &outcome.report.warnings {
                    eprintln!("warning: {w}");
                }
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.report).expect("reports serialize")
                );
            } else {
                print!("{}", render_text(&outcome.report));
            }
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
