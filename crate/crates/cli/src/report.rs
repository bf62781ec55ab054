//! Running a session and serializing the per-check records.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::ast::Session;
use crate::checks::{run_check, Outcome};
use crate::eval::Env;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Record {
    pub name: String,
    pub status: Status,
    pub witness: String,
    pub millis: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub records: Vec<Record>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Record wall-clock time; off by default so reports stay byte-identical.
    pub timing: bool,
    pub only: Option<String>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status == Status::Pass)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let count = |s| self.records.iter().filter(|r| r.status == s).count();
        format!(
            "{} checks: {} pass, {} fail, {} error",
            self.records.len(),
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Error)
        )
    }
}

/// Evaluate the declarations and run the checks in parallel, keeping declaration order.
pub fn run(session: &Session, opts: &RunOptions) -> Report {
    let env = Env::build(session, opts.seed);
    let checks: Vec<_> = session
        .checks()
        .filter(|(d, _, _)| opts.only.as_deref().is_none_or(|o| o == d.name))
        .collect();
    let records = checks
        .par_iter()
        .map(|(d, kind, args)| {
            let start = Instant::now();
            let outcome = run_check(&env, *kind, args);
            let millis = if opts.timing { start.elapsed().as_millis() as u64 } else { 0 };
            let (status, witness) = match outcome {
                Outcome::Pass => (Status::Pass, "0".to_string()),
                Outcome::Fail(w) => (Status::Fail, w),
                Outcome::Error(e) => (Status::Error, e),
            };
            Record { name: d.name.clone(), status, witness, millis }
        })
        .collect();
    Report { records }
}
