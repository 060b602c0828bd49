use std::ops::ControlFlow;

use super::{OracleError, ScaleGuard};
use crate::model::{Allocation, Instance, Location, Mode, Plant};
use crate::stability::{meets_level, StabilityLevel};

/// Visits every capacity-feasible allocation onto open ranked plants in
/// lexicographic order of the assignment vector. Unassigned customers are
/// only generated in cha mode. The callback sees the assignment vector and
/// the occupancy per plant.
pub fn for_each_feasible_allocation<F>(inst: &Instance, loc: &Location, mut visit: F)
where
    F: FnMut(&[Option<Plant>], &[u32]) -> ControlFlow<()>,
{
    let choices: Vec<Vec<Option<Plant>>> = inst
        .customers()
        .map(|i| {
            let mut c: Vec<Option<Plant>> = Vec::new();
            if inst.mode() == Mode::Cha {
                c.push(None);
            }
            c.extend(
                inst.plants()
                    .filter(|&j| loc.is_open(j) && inst.rank(i, j).is_some())
                    .map(Some),
            );
            c
        })
        .collect();
    let mut state = Search {
        inst,
        choices: &choices,
        assigned: vec![None; inst.n_customers()],
        occ: vec![0; inst.n_plants()],
    };
    let _ = state.descend(0, &mut visit);
}

struct Search<'a> {
    inst: &'a Instance,
    choices: &'a [Vec<Option<Plant>>],
    assigned: Vec<Option<Plant>>,
    occ: Vec<u32>,
}

impl Search<'_> {
    fn descend<F>(&mut self, i: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[Option<Plant>], &[u32]) -> ControlFlow<()>,
    {
        if i == self.assigned.len() {
            return visit(&self.assigned, &self.occ);
        }
        for &choice in &self.choices[i] {
            match choice {
                None => self.descend(i + 1, visit)?,
                Some(j) if self.occ[j.index()] < self.inst.capacity(j) => {
                    self.occ[j.index()] += 1;
                    self.assigned[i] = Some(j);
                    let flow = self.descend(i + 1, visit);
                    self.occ[j.index()] -= 1;
                    self.assigned[i] = None;
                    flow?;
                }
                Some(_) => {}
            }
        }
        ControlFlow::Continue(())
    }
}

/// Every feasible allocation for `loc`, in lexicographic order.
pub fn all_feasible_allocations(
    inst: &Instance,
    loc: &Location,
    guard: ScaleGuard,
) -> Result<Vec<Allocation>, OracleError> {
    guard.check(inst)?;
    loc.check(inst)?;
    let mut out = Vec::new();
    for_each_feasible_allocation(inst, loc, |assigned, _| {
        out.push(Allocation::from_assignments(inst, assigned.to_vec()).expect("feasible by construction"));
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Every feasible allocation for `loc` that is cyclic-coalition stable,
/// sorted by assignment vector.
pub fn enumerate_cc_stable(
    inst: &Instance,
    loc: &Location,
    guard: ScaleGuard,
) -> Result<Vec<Allocation>, OracleError> {
    enumerate_stable(inst, loc, StabilityLevel::CyclicCoalition, guard)
}

/// Every feasible allocation for `loc` meeting `level`, sorted by assignment
/// vector.
pub fn enumerate_stable(
    inst: &Instance,
    loc: &Location,
    level: StabilityLevel,
    guard: ScaleGuard,
) -> Result<Vec<Allocation>, OracleError> {
    guard.check(inst)?;
    loc.check(inst)?;
    let mut out = Vec::new();
    for_each_feasible_allocation(inst, loc, |assigned, _| {
        let alloc =
            Allocation::from_assignments(inst, assigned.to_vec()).expect("feasible by construction");
        if meets_level(inst, loc, &alloc, level) {
            out.push(alloc);
        }
        ControlFlow::Continue(())
    });
    out.sort();
    out.dedup();
    Ok(out)
}
