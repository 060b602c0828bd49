//! Serial-dictatorship incumbents for models built from a CFLCP instance.

use crate::milp::{lift_serial_dictatorship, Formulation, MilpModel};
use crate::model::Location;
use crate::oracles::Permutation;

/// Candidate full value vectors; the caller verifies them.
pub(crate) fn candidates(model: &MilpModel, root_x: &[f64]) -> Vec<Vec<f64>> {
    let Some(origin) = model.origin() else {
        return Vec::new();
    };
    let inst = &origin.instance;
    let perm = Permutation::identity(inst.n_customers());
    let mut locations = Vec::new();
    match origin.formulation {
        Formulation::SecondLevel => return Vec::new(),
        Formulation::ChaPo => locations.push(Location::all_open(inst.n_plants())),
        _ => {
            let mut open: Vec<bool> = inst
                .plants()
                .map(|j| {
                    model
                        .var_index(&format!("y_{}", j.number()))
                        .map_or(true, |k| root_x[k] >= 0.5)
                })
                .collect();
            // Top up with the cheapest closed plants until capacity suffices.
            let mut closed: Vec<_> = inst.plants().filter(|j| !open[j.index()]).collect();
            closed.sort_by_key(|&j| (inst.open_cost(j), j.index()));
            let mut cap: u64 = inst
                .plants()
                .filter(|j| open[j.index()])
                .map(|j| inst.capacity(j) as u64)
                .sum();
            for j in closed {
                if cap >= inst.n_customers() as u64 {
                    break;
                }
                open[j.index()] = true;
                cap += inst.capacity(j) as u64;
            }
            locations.push(Location::new(open));
            locations.push(Location::all_open(inst.n_plants()));
        }
    }
    locations.dedup();
    locations
        .iter()
        .filter_map(|loc| lift_serial_dictatorship(model, loc, &perm).ok())
        .collect()
}
