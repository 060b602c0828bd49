//! Blocking certificates and stability classification.
//!
//! Coalitions are searched on the plant-level improvement digraph: any
//! blocking set reduces to one whose customers occupy distinct plants, which
//! is a directed cycle in that graph.

mod digraph;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Allocation, Customer, Instance, Location, ModelError, Plant};

pub use digraph::ImprovementDigraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabilityError {
    #[error("customer {customer} is assigned to plant {plant}, which is closed")]
    ClosedPlantUsed { customer: Customer, plant: Plant },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Stability notions, weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityLevel {
    Customer,
    Pairwise,
    CyclicCoalition,
}

impl StabilityLevel {
    pub const ALL: [StabilityLevel; 3] = [
        StabilityLevel::Customer,
        StabilityLevel::Pairwise,
        StabilityLevel::CyclicCoalition,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            StabilityLevel::Customer => "cs",
            StabilityLevel::Pairwise => "pw",
            StabilityLevel::CyclicCoalition => "cc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityClass {
    NotCustomerStable,
    CustomerStableOnly,
    PairwiseStableOnly,
    CyclicCoalitionStable,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::NotCustomerStable => "not-customer-stable",
            StabilityClass::CustomerStableOnly => "customer-stable-only",
            StabilityClass::PairwiseStableOnly => "pairwise-stable-only",
            StabilityClass::CyclicCoalitionStable => "cyclic-coalition-stable",
        }
    }

    /// Whether an allocation of this class meets `level`.
    pub fn satisfies(self, level: StabilityLevel) -> bool {
        let rank = match level {
            StabilityLevel::Customer => StabilityClass::CustomerStableOnly,
            StabilityLevel::Pairwise => StabilityClass::PairwiseStableOnly,
            StabilityLevel::CyclicCoalition => StabilityClass::CyclicCoalitionStable,
        };
        self >= rank
    }
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockingCustomer {
    pub customer: Customer,
    /// `None` only for an unassigned customer in cha mode.
    pub current_plant: Option<Plant>,
    /// The customer's most preferred open undersubscribed plant.
    pub better_plant: Plant,
}

/// Two customers who both gain by swapping plants. `customers.0 < customers.1`
/// and `plants.k` is the current plant of `customers.k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockingPair {
    pub customers: (Customer, Customer),
    pub plants: (Plant, Plant),
}

impl BlockingPair {
    /// Executes the swap.
    pub fn apply(&self, inst: &Instance, alloc: &Allocation) -> Result<Allocation, ModelError> {
        let mut assigned = alloc.assignments().to_vec();
        assigned[self.customers.0.index()] = Some(self.plants.1);
        assigned[self.customers.1.index()] = Some(self.plants.0);
        Allocation::from_assignments(inst, assigned)
    }
}

/// Customers at distinct plants `plants[t]`, each wanting `moves_to[t]`,
/// which is the next plant around the cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockingCoalition {
    pub customers: Vec<Customer>,
    pub plants: Vec<Plant>,
    pub moves_to: Vec<Plant>,
}

impl BlockingCoalition {
    /// Executes the rotation.
    pub fn apply(&self, inst: &Instance, alloc: &Allocation) -> Result<Allocation, ModelError> {
        let mut assigned = alloc.assignments().to_vec();
        for (i, j) in self.customers.iter().zip(&self.moves_to) {
            assigned[i.index()] = Some(*j);
        }
        Allocation::from_assignments(inst, assigned)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub blocking_customers: Vec<BlockingCustomer>,
    pub blocking_pairs: Vec<BlockingPair>,
    pub blocking_coalition: Option<BlockingCoalition>,
    pub class: StabilityClass,
}

fn check_feasible(
    inst: &Instance,
    loc: &Location,
    alloc: &Allocation,
) -> Result<(), StabilityError> {
    loc.check(inst)?;
    if alloc.n_customers() != inst.n_customers() {
        return Err(ModelError::AllocationLength {
            expected: inst.n_customers(),
            found: alloc.n_customers(),
        }
        .into());
    }
    for (i, j) in alloc.pairs() {
        inst.check_plant(j)?;
        if !loc.is_open(j) {
            return Err(StabilityError::ClosedPlantUsed {
                customer: i,
                plant: j,
            });
        }
        if alloc.occupancy(j) > inst.capacity(j) {
            return Err(ModelError::CapacityExceeded {
                plant: j,
                occupancy: alloc.occupancy(j),
                capacity: inst.capacity(j),
            }
            .into());
        }
    }
    Ok(())
}

/// Customers who strictly prefer some open plant with spare capacity.
pub fn find_blocking_customers(
    inst: &Instance,
    loc: &Location,
    alloc: &Allocation,
) -> Result<Vec<BlockingCustomer>, StabilityError> {
    check_feasible(inst, loc, alloc)?;
    Ok(blocking_customers_unchecked(inst, loc, alloc))
}

fn blocking_customers_unchecked(
    inst: &Instance,
    loc: &Location,
    alloc: &Allocation,
) -> Vec<BlockingCustomer> {
    let mut out = Vec::new();
    for i in inst.customers() {
        let current = alloc.plant_of(i);
        for &j in inst.pref(i) {
            if Some(j) == current {
                break;
            }
            if loc.is_open(j) && alloc.occupancy(j) < inst.capacity(j) {
                out.push(BlockingCustomer {
                    customer: i,
                    current_plant: current,
                    better_plant: j,
                });
                break;
            }
        }
    }
    out
}

/// All blocking pairs, ordered by (first customer, second customer).
pub fn find_blocking_pairs(inst: &Instance, alloc: &Allocation) -> Vec<BlockingPair> {
    let assigned: Vec<(Customer, Plant)> = alloc.pairs().collect();
    let mut out = Vec::new();
    for (a, &(i, j)) in assigned.iter().enumerate() {
        for &(i2, j2) in &assigned[a + 1..] {
            if j != j2 && inst.prefers_unchecked(i, j2, j) && inst.prefers_unchecked(i2, j, j2) {
                out.push(BlockingPair {
                    customers: (i, i2),
                    plants: (j, j2),
                });
            }
        }
    }
    out
}

pub fn build_improvement_digraph(inst: &Instance, alloc: &Allocation) -> ImprovementDigraph {
    ImprovementDigraph::build(inst, alloc)
}

/// A shortest blocking coalition of at least three customers, if any.
pub fn find_blocking_coalition(inst: &Instance, alloc: &Allocation) -> Option<BlockingCoalition> {
    let graph = ImprovementDigraph::build(inst, alloc);
    let cycle = graph.shortest_long_cycle()?;
    let k = cycle.len();
    let customers = (0..k)
        .map(|t| {
            graph
                .witness(cycle[t], cycle[(t + 1) % k])
                .expect("cycle arcs carry witnesses")
        })
        .collect();
    let moves_to = (0..k).map(|t| cycle[(t + 1) % k]).collect();
    Some(BlockingCoalition {
        customers,
        plants: cycle,
        moves_to,
    })
}

/// Computes every certificate family and the resulting class.
pub fn classify(
    inst: &Instance,
    loc: &Location,
    alloc: &Allocation,
) -> Result<StabilityReport, StabilityError> {
    check_feasible(inst, loc, alloc)?;
    let blocking_customers = blocking_customers_unchecked(inst, loc, alloc);
    let blocking_pairs = find_blocking_pairs(inst, alloc);
    let blocking_coalition = find_blocking_coalition(inst, alloc);
    let class = if !blocking_customers.is_empty() {
        StabilityClass::NotCustomerStable
    } else if !blocking_pairs.is_empty() {
        StabilityClass::CustomerStableOnly
    } else if blocking_coalition.is_some() {
        StabilityClass::PairwiseStableOnly
    } else {
        StabilityClass::CyclicCoalitionStable
    };
    Ok(StabilityReport {
        blocking_customers,
        blocking_pairs,
        blocking_coalition,
        class,
    })
}

/// Whether a feasible allocation meets `level`; stops at the first
/// certificate found.
pub fn meets_level(
    inst: &Instance,
    loc: &Location,
    alloc: &Allocation,
    level: StabilityLevel,
) -> bool {
    let blocked_customer = inst.customers().any(|i| {
        let current = alloc.plant_of(i);
        inst.pref(i)
            .iter()
            .take_while(|&&j| Some(j) != current)
            .any(|&j| loc.is_open(j) && alloc.occupancy(j) < inst.capacity(j))
    });
    if blocked_customer {
        return false;
    }
    if level == StabilityLevel::Customer {
        return true;
    }
    let pairs: Vec<(Customer, Plant)> = alloc.pairs().collect();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for &(i2, j2) in &pairs[a + 1..] {
            if j != j2 && inst.prefers_unchecked(i, j2, j) && inst.prefers_unchecked(i2, j, j2) {
                return false;
            }
        }
    }
    if level == StabilityLevel::Pairwise {
        return true;
    }
    ImprovementDigraph::build(inst, alloc)
        .shortest_long_cycle()
        .is_none()
}

/// Classifies against the plants the allocation actually uses.
pub fn classify_used(inst: &Instance, alloc: &Allocation) -> Result<StabilityReport, StabilityError> {
    classify(inst, &alloc.used_location(), alloc)
}

#[cfg(test)]
mod tests;
