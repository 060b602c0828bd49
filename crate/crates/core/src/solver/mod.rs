//! Exact solving: a bounded-variable revised simplex for LP relaxations and a
//! best-bound branch-and-bound over integrality-flagged variables.

mod bnb;
mod incumbent;
mod simplex;

use serde::Serialize;
use thiserror::Error;

use crate::milp::MilpModel;
use simplex::{Simplex, StandardForm};

pub use bnb::{gap_pct, solve_milp, solve_milp_with, Limits, MilpSolution, MilpStatus, ProgressPoint};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("numerical failure in model {model}: {message}")]
    Numerical {
        model: String,
        message: String,
        /// LP-format dump of the failing model.
        dump: String,
    },
    #[error("relaxation of model {model} is {status}")]
    NotOptimal { model: String, status: LpStatus },
    #[error("model {model} does not match {expected} values")]
    WrongLength { model: String, expected: usize },
}

impl SolverError {
    pub(crate) fn numerical(model: &MilpModel, message: String) -> Self {
        let dump = crate::bridge::write_lp_file(model)
            .map(|b| String::from_utf8_lossy(&b).into_owned())
            .unwrap_or_else(|e| format!("<unavailable: {e}>"));
        SolverError::Numerical {
            model: model.name().to_string(),
            message,
            dump,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<simplex::LpStatus> for LpStatus {
    fn from(s: simplex::LpStatus) -> Self {
        match s {
            simplex::LpStatus::Optimal => LpStatus::Optimal,
            simplex::LpStatus::Infeasible => LpStatus::Infeasible,
            simplex::LpStatus::Unbounded => LpStatus::Unbounded,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the model's own sense; meaningful when optimal.
    pub objective: f64,
    pub values: Vec<f64>,
    /// Row duals in the model's sense: the objective's rate of change per
    /// unit increase of the row's right-hand side.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

/// Solves the linear relaxation of `model` (integrality flags are ignored).
pub fn solve_lp(model: &MilpModel) -> Result<LpSolution, SolverError> {
    let sf = StandardForm::from_model(model);
    let (lo, hi) = (sf.lower.clone(), sf.upper.clone());
    let mut spx = Simplex::cold(&sf, lo, hi);
    let out = spx
        .solve_cold()
        .map_err(|e| SolverError::numerical(model, e.0))?;
    let values = spx.state().x[..sf.n].to_vec();
    let duals = if out.status == simplex::LpStatus::Optimal {
        spx.row_duals().into_iter().map(|p| sf.sign * p).collect()
    } else {
        vec![0.0; sf.m]
    };
    Ok(LpSolution {
        status: out.status.into(),
        objective: sf.sign * out.objective,
        values,
        duals,
        iterations: out.iterations,
    })
}

/// Objective of the full linear relaxation.
pub fn root_bound(model: &MilpModel) -> Result<f64, SolverError> {
    let lp = solve_lp(&model.relaxed())?;
    match lp.status {
        LpStatus::Optimal => Ok(lp.objective),
        status => Err(SolverError::NotOptimal {
            model: model.name().to_string(),
            status,
        }),
    }
}
