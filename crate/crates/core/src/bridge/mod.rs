//! Exchange with external MILP solvers: CPLEX-style LP files out, plain
//! `name value` solution files in.

mod lp;
mod solution;

use thiserror::Error;

use crate::milp::MilpError;

pub use lp::{read_lp_file, write_lp_file, MAX_NAME_LEN};
pub use solution::{read_solution_file, write_solution_file};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("name longer than {MAX_NAME_LEN} characters: {0}")]
    NameTooLong(String),
    #[error("name not representable in the LP format: {0}")]
    BadName(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown variable {name}")]
    UnknownVariable { line: usize, name: String },
    #[error("solution file has no '# status' header")]
    MissingStatus,
    #[error("solution violates {name} by {violation}")]
    Verification { name: String, violation: f64 },
    #[error(transparent)]
    Milp(#[from] MilpError),
}

#[cfg(test)]
mod tests;
