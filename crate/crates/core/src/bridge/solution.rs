use std::fmt::Write as _;
use std::time::Duration;

use super::BridgeError;
use crate::milp::MilpModel;
use crate::solver::{MilpSolution, MilpStatus};

const VERIFY_TOL: f64 = 1e-6;

fn parse_status(s: &str) -> Option<MilpStatus> {
    Some(match s.to_ascii_lowercase().as_str() {
        "optimal" => MilpStatus::Optimal,
        "infeasible" => MilpStatus::Infeasible,
        "unbounded" => MilpStatus::Unbounded,
        "limit" | "feasible" | "timelimit" | "time-limit" => MilpStatus::Limit,
        _ => return None,
    })
}

/// Parses a solution file:
///
/// ```text
/// # status optimal
/// # objective 19
/// y_1 1
/// x_1_4 1
/// ```
///
/// Variables not listed are 0. Values are verified against every row and
/// bound at 1e-6 and integrality at 1e-6; the objective is recomputed and
/// replaces the header value when they differ.
pub fn read_solution_file(text: &str, model: &MilpModel) -> Result<MilpSolution, BridgeError> {
    let mut status = None;
    let mut header_objective = None;
    let mut values = vec![0.0; model.num_vars()];
    let mut any_value = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let bad = |message: String| BridgeError::Parse { line, message };
        if let Some(rest) = trimmed.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            match (it.next(), it.next()) {
                (Some("status"), Some(s)) => {
                    status = Some(parse_status(s).ok_or_else(|| bad(format!("unknown status '{s}'")))?);
                }
                (Some("objective"), Some(v)) => {
                    header_objective =
                        Some(v.parse::<f64>().map_err(|_| bad(format!("bad objective '{v}'")))?);
                }
                _ => {}
            }
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (Some(name), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad(format!("expected 'name value', found '{trimmed}'")));
        };
        let k = model.var_index(name).ok_or_else(|| BridgeError::UnknownVariable {
            line,
            name: name.to_string(),
        })?;
        let value = v
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(format!("bad value '{v}' for {name}")))?;
        values[k] = value;
        any_value = true;
    }
    let status = status.ok_or(BridgeError::MissingStatus)?;
    let mut solution = MilpSolution {
        status,
        objective: None,
        best_bound: f64::NAN,
        gap: None,
        values: None,
        nodes: 0,
        wall_time: Duration::ZERO,
        workers: 0,
        root_bound: None,
        progress: Vec::new(),
    };
    if matches!(status, MilpStatus::Infeasible | MilpStatus::Unbounded) && !any_value {
        return Ok(solution);
    }
    let (violation, row) = model.max_violation(&values);
    if violation > VERIFY_TOL {
        return Err(BridgeError::Verification {
            name: row.unwrap_or_default(),
            violation,
        });
    }
    for (v, &x) in model.variables().iter().zip(&values) {
        if v.integer && (x - x.round()).abs() > VERIFY_TOL {
            return Err(BridgeError::Verification {
                name: v.name.clone(),
                violation: (x - x.round()).abs(),
            });
        }
    }
    let objective = model.objective_value(&values);
    if let Some(h) = header_objective {
        if (h - objective).abs() > VERIFY_TOL * (1.0 + objective.abs()) {
            log::warn!("solution header objective {h} differs from recomputed {objective}; using the recomputed value");
        }
    }
    solution.objective = Some(objective);
    if status == MilpStatus::Optimal {
        solution.best_bound = objective;
        solution.gap = Some(0.0);
    }
    solution.values = Some(values);
    Ok(solution)
}

/// Writes `values` in the format read by [`read_solution_file`], listing
/// nonzero values only.
pub fn write_solution_file(model: &MilpModel, status: MilpStatus, values: Option<&[f64]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# status {}", status.as_str());
    if let Some(values) = values {
        let _ = writeln!(out, "# objective {}", fmt_num(model.objective_value(values)));
        for (v, &x) in model.variables().iter().zip(values) {
            if x != 0.0 {
                let _ = writeln!(out, "{} {}", v.name, fmt_num(x));
            }
        }
    }
    out
}

fn fmt_num(x: f64) -> String {
    if x == x.round() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
