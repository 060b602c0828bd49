use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{locations_lex, second_level_assign, OracleError, ScaleGuard};
use crate::milp::{build_second_level, decode, BuildOptions};
use crate::model::{Allocation, Customer, Instance, Location, Mode};
use crate::solver::{solve_milp, Limits, MilpStatus};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilevelSolution {
    pub location: Location,
    pub allocation: Allocation,
    /// Opening plus assignment cost.
    pub cost: u64,
    /// Σ p_ij, minimal for the location.
    pub pref_value: u64,
}

/// The optimistic follower response for a fixed location: among the
/// rank-minimizing allocations, one of least assignment cost.
pub fn bilevel_for_location(inst: &Instance, loc: &Location) -> Result<BilevelSolution, OracleError> {
    let target = second_level_assign(inst, loc)?.pref_value;
    let model = build_second_level(inst, loc, Some(target as i64), &BuildOptions::default())?;
    let sol = solve_milp(&model, &Limits::default()).map_err(|e| OracleError::Solver(e.to_string()))?;
    let values = match (sol.status, sol.values) {
        (MilpStatus::Optimal, Some(v)) => v,
        (status, _) => {
            return Err(OracleError::Solver(format!(
                "second-level model for {} ended {status}",
                loc
            )))
        }
    };
    let (_, allocation) = decode(&model, &values)?;
    Ok(BilevelSolution {
        location: loc.clone(),
        cost: loc.cost(inst) + allocation.assignment_cost(inst),
        pref_value: allocation.pref_value(inst),
        allocation,
    })
}

/// Optimistic bilevel optimum by location enumeration. Ties go to the
/// lexicographically smallest location (closed before open, plant 1 first).
pub fn bilevel_baseline(
    inst: &Instance,
    guard: ScaleGuard,
    workers: usize,
) -> Result<BilevelSolution, OracleError> {
    if inst.mode() != Mode::Cflcp {
        return Err(OracleError::WrongMode);
    }
    guard.check(inst)?;
    let n = inst.n_customers() as u64;
    let candidates: Vec<Location> = locations_lex(inst.n_plants())
        .filter(|loc| loc.open_capacity(inst) >= n)
        .collect();
    if candidates.is_empty() {
        return Err(OracleError::NoFeasibleLocation);
    }
    let lower_bound = |loc: &Location| -> u64 {
        loc.cost(inst)
            + inst
                .customers()
                .map(|i: Customer| loc.open_plants().map(|j| inst.assign_cost(i, j)).min().unwrap_or(0))
                .sum::<u64>()
    };
    let best_cost = AtomicU64::new(u64::MAX);
    let next = AtomicUsize::new(0);
    let best: Mutex<Option<(u64, usize, BilevelSolution)>> = Mutex::new(None);
    let failure: Mutex<Option<OracleError>> = Mutex::new(None);
    let run = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        if k >= candidates.len() || failure.lock().unwrap().is_some() {
            return;
        }
        let loc = &candidates[k];
        if lower_bound(loc) > best_cost.load(Ordering::Acquire) {
            continue;
        }
        match bilevel_for_location(inst, loc) {
            Ok(sol) => {
                best_cost.fetch_min(sol.cost, Ordering::AcqRel);
                let mut slot = best.lock().unwrap();
                let better = slot
                    .as_ref()
                    .map_or(true, |(c, idx, _)| (sol.cost, k) < (*c, *idx));
                if better {
                    *slot = Some((sol.cost, k, sol));
                }
            }
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                return;
            }
        }
    };
    if workers <= 1 {
        run();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(run);
            }
        });
    }
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let (_, _, sol) = best
        .into_inner()
        .unwrap()
        .expect("at least one candidate location is evaluated");
    Ok(sol)
}
