use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use forge_cli::runner::{run_tasks, RunOptions};
use forge_cli::session::parse_session;

/// Exact commutative-algebra runner: resolutions, grades, embeddings,
/// quotient-ring constructions, and syzygy order-ideal checks over
/// graded polynomial rings.
#[derive(Parser)]
#[command(name = "forge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a session file and print the JSON report.
    Run {
        /// Path to the session file.
        session: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Run independent tasks concurrently (deterministic output order).
        #[arg(long)]
        parallel: bool,
        /// Stop at the first failing or erroring task.
        #[arg(long = "fail-fast")]
        fail_fast: bool,
        /// Default seed for seeded tasks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { session, json, parallel, fail_fast, seed } => {
            let text = match std::fs::read_to_string(&session) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", session.display());
                    return ExitCode::from(2);
                }
            };
            let parsed = match parse_session(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let report = run_tasks(&parsed, RunOptions { parallel, fail_fast, seed });
            let rendered = serde_json::to_string_pretty(&report.json).expect("serializable");
            match json {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, rendered.as_bytes()) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                    println!("{}", report.json["overall"].as_str().unwrap_or("?"));
                }
                None => println!("{rendered}"),
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
