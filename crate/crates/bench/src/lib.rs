//! Inputs shared by the benchmark groups.

use cflcp_core::generator::{generate, Preset};
use cflcp_core::model::{Allocation, Instance, Location};
use cflcp_core::oracles::serial_dictatorship;
use cflcp_core::Permutation;

/// Generates seed `seed` of preset `name`.
pub fn preset_instance(name: &str, seed: u64) -> Instance {
    let preset = Preset::parse(name).expect("valid preset");
    generate(&preset.params(seed)).expect("valid parameters")
}

/// All plants open with the identity serial-dictatorship allocation.
pub fn identity_allocation(inst: &Instance) -> (Location, Allocation) {
    let loc = Location::all_open(inst.n_plants());
    let alloc = serial_dictatorship(inst, &loc, &Permutation::identity(inst.n_customers()))
        .expect("all plants open hold every customer");
    (loc, alloc)
}

/// An allocation that fills plants in customer order, ignoring preferences.
pub fn round_robin_allocation(inst: &Instance) -> Allocation {
    let m = inst.n_plants();
    let numbers: Vec<Option<usize>> = (0..inst.n_customers()).map(|i| Some(i % m + 1)).collect();
    Allocation::from_numbers(inst, &numbers).expect("fits when capacity * m >= n")
}
