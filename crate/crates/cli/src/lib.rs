//! Session files for the density calculus: parsing, evaluation and check running.

pub mod ast;
pub mod error;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod checks;
pub mod report;

pub use error::CliError;
pub use parser::parse_session;
pub use report::{run, Record, Report, RunOptions, Status};
