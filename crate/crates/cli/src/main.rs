//! `amalgam`: check, build and inspect amalgamation patterns, groupoids,
//! hypergraphs and EPPA instances stored as JSON.
//!
//! Exit codes: 0 when every check holds, 1 when some check fails, 2 for bad
//! input or usage, 3 when a search ran out of budget.

mod build;
mod check;
mod report;
mod suites;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use report::{error_code, CommandReport};

#[derive(Parser, Debug)]
#[command(name = "amalgam", version, about = "Amalgamation patterns, groupoids and EPPA")]
struct Cli {
    /// Print reports and errors as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate artifacts and decide properties of them.
    Check(check::CheckArgs),
    /// Construct an artifact, verify it and write it.
    Build(build::BuildArgs),
    /// Render an artifact as Graphviz DOT.
    ExportDot(suites::DotArgs),
    /// Run randomised consistency suites.
    Fuzz(suites::FuzzArgs),
    /// Time standard operations on the catalogue examples.
    Bench(suites::BenchArgs),
}

/// Writes to stdout, ignoring a closed pipe.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(rep: &CommandReport, json: bool) {
    if json {
        out(&format!("{}\n", rep.to_json()));
    } else {
        out(&format!("{rep}\n"));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Check(a) => check::run(a),
        Command::Build(a) => build::run(a),
        Command::Fuzz(a) => suites::fuzz(a),
        Command::Bench(a) => suites::bench(a),
        Command::ExportDot(a) => suites::export_dot(a).map(|(dot, mut rep)| {
            if a.out.is_none() {
                if cli.json {
                    rep.document = Some(dot);
                } else {
                    out(&dot);
                }
            }
            rep
        }),
    };
    let code = match res {
        Ok(rep) => {
            let to_stdout = !matches!(&cli.command, Command::ExportDot(a) if a.out.is_none()) || cli.json;
            if to_stdout {
                emit(&rep, cli.json);
            }
            rep.exit_code()
        }
        Err(e) => {
            let code = error_code(&e);
            if cli.json {
                let v = serde_json::json!({ "error": e.to_string(), "exit_code": code });
                out(&format!("{}\n", serde_json::to_string_pretty(&v).expect("json values serialize")));
            } else {
                eprintln!("amalgam: {e}");
            }
            code
        }
    };
    ExitCode::from(code as u8)
}
