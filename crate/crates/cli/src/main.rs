use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use denscalc::ast::DeclKind;
use denscalc::{parse_session, run, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "denscalc", version, about = "Run density-calculus check sessions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a session file and run its checks.
    Run {
        file: PathBuf,
        /// Write the JSON-lines report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Run only the check with this name.
        #[arg(long)]
        only: Option<String>,
        /// List declarations and check names without running anything.
        #[arg(long)]
        list: bool,
        /// Fill in elapsed milliseconds (reports are then not reproducible).
        #[arg(long)]
        timing: bool,
    },
}

fn seed() -> Result<u64, String> {
    match std::env::var("DENSCALC_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| format!("DENSCALC_SEED must be an unsigned integer, got '{s}'")),
        Err(_) => Ok(0),
    }
}

fn main() -> ExitCode {
    let Cmd::Run { file, json, only, list, timing } = Cli::parse().cmd;
    let fail = |msg: String| {
        eprintln!("denscalc: {msg}");
        ExitCode::from(2)
    };
    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {}", file.display(), CliError::from(e))),
    };
    let session = match parse_session(&text) {
        Ok(s) => s,
        Err(e) => return fail(format!("{}:{e}", file.display())),
    };
    if list {
        for d in &session.decls {
            let what = match &d.kind {
                DeclKind::Check { kind, .. } => format!("check {}", kind.name()),
                DeclKind::Chart { .. } => "chart".into(),
                DeclKind::Opaque { .. } => "opaque".into(),
                DeclKind::Let { .. } => "let".into(),
                DeclKind::Density { .. } => "density".into(),
                DeclKind::Operator { .. } => "operator".into(),
                DeclKind::Connection { .. } => "connection".into(),
                DeclKind::Pencil { .. } => "pencil".into(),
                DeclKind::Transition { .. } => "transition".into(),
                DeclKind::Matrix { .. } => "matrix".into(),
                DeclKind::Random { .. } => "random".into(),
            };
            println!("{}\t{what}\t{}", d.pos, d.name);
        }
        return ExitCode::SUCCESS;
    }
    if let Some(o) = &only {
        if !session.checks().any(|(d, _, _)| d.name == *o) {
            return fail(format!("no check named '{o}'"));
        }
    }
    let seed = match seed() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let report = run(&session, &RunOptions { seed, timing, only });
    let body = report.to_jsonl();
    match json {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, body) {
                return fail(format!("{}: {e}", path.display()));
            }
            println!("{}", report.summary());
        }
        None => print!("{body}"),
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
