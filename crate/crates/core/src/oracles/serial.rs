use super::OracleError;
use crate::model::{Allocation, Customer, Instance, Location, Mode, Plant};

/// An order in which customers pick plants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    order: Vec<Customer>,
}

impl Permutation {
    pub fn new(order: Vec<Customer>) -> Result<Self, OracleError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for c in &order {
            if c.index() >= n || seen[c.index()] {
                return Err(OracleError::NotAPermutation(
                    order.iter().map(|c| c.number()).collect(),
                ));
            }
            seen[c.index()] = true;
        }
        Ok(Permutation { order })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            order: (0..n).map(Customer).collect(),
        }
    }

    /// Builds a permutation from 1-based customer numbers.
    pub fn from_numbers(numbers: &[usize]) -> Result<Self, OracleError> {
        let order = numbers
            .iter()
            .map(|&k| {
                Customer::from_number(k)
                    .ok_or_else(|| OracleError::NotAPermutation(numbers.to_vec()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(order)
    }

    pub fn order(&self) -> &[Customer] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Each customer in turn takes their most preferred open plant with room.
///
/// In cha mode a customer whose ranked plants are all full stays unassigned.
pub fn serial_dictatorship(
    inst: &Instance,
    loc: &Location,
    perm: &Permutation,
) -> Result<Allocation, OracleError> {
    loc.check(inst)?;
    if perm.len() != inst.n_customers() {
        return Err(OracleError::NotAPermutation(
            perm.order().iter().map(|c| c.number()).collect(),
        ));
    }
    let capacity = loc.open_capacity(inst);
    if inst.mode() == Mode::Cflcp && capacity < inst.n_customers() as u64 {
        return Err(OracleError::InsufficientCapacity {
            capacity,
            customers: inst.n_customers(),
        });
    }
    let mut occ = vec![0u32; inst.n_plants()];
    let mut assigned: Vec<Option<Plant>> = vec![None; inst.n_customers()];
    for &i in perm.order() {
        let pick = inst
            .pref(i)
            .iter()
            .copied()
            .find(|&j| loc.is_open(j) && occ[j.index()] < inst.capacity(j));
        if let Some(j) = pick {
            occ[j.index()] += 1;
            assigned[i.index()] = Some(j);
        }
    }
    Ok(Allocation::from_assignments(inst, assigned)?)
}
