use super::{OracleError, ScaleGuard};
use crate::model::{Allocation, Instance, Location, Mode, Plant};
use crate::stability::{meets_level, StabilityLevel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceOptimum {
    pub location: Location,
    pub allocation: Allocation,
    pub cost: u64,
}

/// Locations as open-flag vectors in lexicographic order (closed before open,
/// plant 1 most significant).
pub(crate) fn locations_lex(m: usize) -> impl Iterator<Item = Location> {
    (0u64..(1u64 << m)).map(move |mask| {
        Location::new((0..m).map(|j| mask >> (m - 1 - j) & 1 == 1).collect())
    })
}

/// Minimum total cost over all locations and all allocations meeting
/// `level`. Ties go to the lexicographically smallest (y, x).
pub fn brute_force_optimum(
    inst: &Instance,
    level: StabilityLevel,
    guard: ScaleGuard,
) -> Result<Option<BruteForceOptimum>, OracleError> {
    if inst.mode() != Mode::Cflcp {
        return Err(OracleError::WrongMode);
    }
    guard.check(inst)?;
    let n = inst.n_customers();
    let mut best: Option<BruteForceOptimum> = None;
    for loc in locations_lex(inst.n_plants()) {
        if loc.open_capacity(inst) < n as u64 {
            continue;
        }
        let fixed = loc.cost(inst);
        // Cheapest open assignment cost per customer, as suffix sums.
        let mut tail = vec![0u64; n + 1];
        for i in (0..n).rev() {
            let c = crate::model::Customer(i);
            let cheapest = loc.open_plants().map(|j| inst.assign_cost(c, j)).min().unwrap_or(0);
            tail[i] = tail[i + 1] + cheapest;
        }
        let mut search = Search {
            inst,
            loc: &loc,
            level,
            tail: &tail,
            assigned: vec![None; n],
            occ: vec![0; inst.n_plants()],
            best_cost: best.as_ref().map(|b| b.cost),
            found: None,
        };
        search.descend(0, fixed);
        if let Some((cost, assigned)) = search.found {
            let allocation = Allocation::from_assignments(inst, assigned)?;
            best = Some(BruteForceOptimum {
                location: loc,
                allocation,
                cost,
            });
        }
    }
    Ok(best)
}

struct Search<'a> {
    inst: &'a Instance,
    loc: &'a Location,
    level: StabilityLevel,
    tail: &'a [u64],
    assigned: Vec<Option<Plant>>,
    occ: Vec<u32>,
    best_cost: Option<u64>,
    found: Option<(u64, Vec<Option<Plant>>)>,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, cost: u64) {
        if self.best_cost.is_some_and(|b| cost + self.tail[i] >= b) {
            return;
        }
        if i == self.assigned.len() {
            let alloc = Allocation::from_assignments(self.inst, self.assigned.clone())
                .expect("feasible by construction");
            if meets_level(self.inst, self.loc, &alloc, self.level) {
                self.best_cost = Some(cost);
                self.found = Some((cost, self.assigned.clone()));
            }
            return;
        }
        let customer = crate::model::Customer(i);
        for j in self.inst.plants() {
            if !self.loc.is_open(j) || self.occ[j.index()] >= self.inst.capacity(j) {
                continue;
            }
            self.occ[j.index()] += 1;
            self.assigned[i] = Some(j);
            self.descend(i + 1, cost + self.inst.assign_cost(customer, j));
            self.occ[j.index()] -= 1;
            self.assigned[i] = None;
        }
    }
}
