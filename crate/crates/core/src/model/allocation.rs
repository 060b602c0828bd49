use serde::Serialize;

use super::error::ModelError;
use super::instance::{Instance, Mode};
use super::{Customer, Plant};

/// The set of open plants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location {
    open: Vec<bool>,
}

impl Location {
    pub fn new(open: Vec<bool>) -> Self {
        Location { open }
    }

    pub fn all_open(m: usize) -> Self {
        Location { open: vec![true; m] }
    }

    pub fn from_plants(m: usize, plants: &[Plant]) -> Result<Self, ModelError> {
        let mut open = vec![false; m];
        for p in plants {
            if p.index() >= m {
                return Err(ModelError::PlantOutOfRange(p.number()));
            }
            open[p.index()] = true;
        }
        Ok(Location { open })
    }

    /// Builds a location from 1-based plant numbers.
    pub fn from_numbers(m: usize, numbers: &[usize]) -> Result<Self, ModelError> {
        let plants = numbers
            .iter()
            .map(|&k| Plant::from_number(k).ok_or(ModelError::PlantOutOfRange(k)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_plants(m, &plants)
    }

    /// Parses `all` or a comma-separated list of 1-based plant ids.
    pub fn parse(m: usize, text: &str) -> Result<Self, ModelError> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("all") {
            return Ok(Self::all_open(m));
        }
        let numbers = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| ModelError::AllocationSyntax(format!("bad plant id '{s}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_numbers(m, &numbers)
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn is_open(&self, j: Plant) -> bool {
        self.open[j.index()]
    }

    pub fn open_plants(&self) -> impl Iterator<Item = Plant> + '_ {
        self.open
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(j, _)| Plant(j))
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.open
    }

    pub fn open_capacity(&self, inst: &Instance) -> u64 {
        self.open_plants().map(|j| inst.capacity(j) as u64).sum()
    }

    pub fn check(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.open.len() != inst.n_plants() {
            return Err(ModelError::LocationLength {
                expected: inst.n_plants(),
                found: self.open.len(),
            });
        }
        Ok(())
    }

    /// Σ f_j over open plants.
    pub fn cost(&self, inst: &Instance) -> u64 {
        self.open_plants().map(|j| inst.open_cost(j)).sum()
    }
}

/// Formats as `{1,3}` with 1-based plant ids.
impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ids: Vec<String> = self.open_plants().map(|j| j.number().to_string()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OccupancyState {
    ClosedOrEmpty,
    Undersubscribed,
    Full,
}

/// A customer-to-plant map with occupancy bookkeeping.
///
/// Ordering and equality follow the assignment vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    assigned: Vec<Option<Plant>>,
    occupancy: Vec<u32>,
}

impl Allocation {
    /// Validates length, ranking, capacity and (in cflcp mode) completeness.
    pub fn from_assignments(
        inst: &Instance,
        assigned: Vec<Option<Plant>>,
    ) -> Result<Self, ModelError> {
        if assigned.len() != inst.n_customers() {
            return Err(ModelError::AllocationLength {
                expected: inst.n_customers(),
                found: assigned.len(),
            });
        }
        let mut occupancy = vec![0u32; inst.n_plants()];
        for (i, slot) in assigned.iter().enumerate() {
            let customer = Customer(i);
            match *slot {
                None if inst.mode() == Mode::Cflcp => {
                    return Err(ModelError::Unassigned(customer))
                }
                None => {}
                Some(j) => {
                    inst.check_plant(j)?;
                    if inst.rank(customer, j).is_none() {
                        return Err(ModelError::Unranked { customer, plant: j });
                    }
                    occupancy[j.index()] += 1;
                }
            }
        }
        for j in inst.plants() {
            if occupancy[j.index()] > inst.capacity(j) {
                return Err(ModelError::CapacityExceeded {
                    plant: j,
                    occupancy: occupancy[j.index()],
                    capacity: inst.capacity(j),
                });
            }
        }
        Ok(Allocation {
            assigned,
            occupancy,
        })
    }

    /// Builds an allocation from 1-based plant numbers (`None` = unassigned).
    pub fn from_numbers(inst: &Instance, numbers: &[Option<usize>]) -> Result<Self, ModelError> {
        let assigned = numbers
            .iter()
            .map(|slot| match slot {
                None => Ok(None),
                Some(k) => Plant::from_number(*k)
                    .map(Some)
                    .ok_or(ModelError::PlantOutOfRange(*k)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_assignments(inst, assigned)
    }

    /// Builds an allocation from per-plant customer groups: `groups[k]` lists
    /// the 1-based customers sitting at plant `k + 1`.
    pub fn from_groups(inst: &Instance, groups: &[&[usize]]) -> Result<Self, ModelError> {
        let mut assigned = vec![None; inst.n_customers()];
        for (j, members) in groups.iter().enumerate() {
            for &c in members.iter() {
                let slot = c
                    .checked_sub(1)
                    .and_then(|i| assigned.get_mut(i))
                    .ok_or(ModelError::CustomerOutOfRange(c))?;
                *slot = Some(Plant(j));
            }
        }
        Self::from_assignments(inst, assigned)
    }

    pub fn n_customers(&self) -> usize {
        self.assigned.len()
    }

    pub fn plant_of(&self, i: Customer) -> Option<Plant> {
        self.assigned[i.index()]
    }

    pub fn assignments(&self) -> &[Option<Plant>] {
        &self.assigned
    }

    pub fn occupancy(&self, j: Plant) -> u32 {
        self.occupancy[j.index()]
    }

    pub fn occupancies(&self) -> &[u32] {
        &self.occupancy
    }

    pub fn customers_at(&self, j: Plant) -> impl Iterator<Item = Customer> + '_ {
        self.assigned
            .iter()
            .enumerate()
            .filter(move |(_, p)| **p == Some(j))
            .map(|(i, _)| Customer(i))
    }

    pub fn n_assigned(&self) -> usize {
        self.assigned.iter().filter(|p| p.is_some()).count()
    }

    /// Plants hosting at least one customer.
    pub fn used_location(&self) -> Location {
        Location::new(self.occupancy.iter().map(|&o| o > 0).collect())
    }

    /// Occupancy counted from scratch, independent of the cached counts.
    pub fn recount(&self, n_plants: usize) -> Vec<u32> {
        let mut occ = vec![0u32; n_plants];
        for j in self.assigned.iter().flatten() {
            occ[j.index()] += 1;
        }
        occ
    }

    /// Moves customer `i` to `target`, keeping occupancy in sync.
    pub fn reassign(
        &mut self,
        inst: &Instance,
        i: Customer,
        target: Option<Plant>,
    ) -> Result<(), ModelError> {
        inst.check_customer(i)?;
        let current = self.assigned[i.index()];
        if current == target {
            return Ok(());
        }
        match target {
            None if inst.mode() == Mode::Cflcp => return Err(ModelError::Unassigned(i)),
            None => {}
            Some(j) => {
                inst.check_plant(j)?;
                if inst.rank(i, j).is_none() {
                    return Err(ModelError::Unranked {
                        customer: i,
                        plant: j,
                    });
                }
                if self.occupancy[j.index()] >= inst.capacity(j) {
                    return Err(ModelError::CapacityExceeded {
                        plant: j,
                        occupancy: self.occupancy[j.index()] + 1,
                        capacity: inst.capacity(j),
                    });
                }
                self.occupancy[j.index()] += 1;
            }
        }
        if let Some(old) = current {
            self.occupancy[old.index()] -= 1;
        }
        self.assigned[i.index()] = target;
        Ok(())
    }

    /// Σ g_ij over assigned customers.
    pub fn assignment_cost(&self, inst: &Instance) -> u64 {
        self.pairs().map(|(i, j)| inst.assign_cost(i, j)).sum()
    }

    /// Σ p_ij over assigned customers.
    pub fn pref_value(&self, inst: &Instance) -> u64 {
        self.pairs()
            .map(|(i, j)| inst.rank(i, j).unwrap_or(0) as u64)
            .sum()
    }

    /// Assigned (customer, plant) pairs in customer order.
    pub fn pairs(&self) -> impl Iterator<Item = (Customer, Plant)> + '_ {
        self.assigned
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|j| (Customer(i), j)))
    }

    /// One-line JSON array of 1-based plant ids or null.
    pub fn to_json(&self) -> String {
        let items: Vec<String> = self
            .assigned
            .iter()
            .map(|p| match p {
                Some(j) => j.number().to_string(),
                None => "null".into(),
            })
            .collect();
        format!("[{}]\n", items.join(", "))
    }

    /// Per-plant groups of 1-based customers, e.g. `{1,6,7}/{2,4,5}/{3,8}`.
    pub fn groups_string(&self, n_plants: usize) -> String {
        (0..n_plants)
            .map(|j| {
                let members: Vec<String> = self
                    .customers_at(Plant(j))
                    .map(|c| c.number().to_string())
                    .collect();
                format!("{{{}}}", members.join(","))
            })
            .collect::<Vec<_>>()
            .join("/")
    }
}

/// Parses an allocation file against `inst`.
pub fn parse_allocation(inst: &Instance, text: &str) -> Result<Allocation, ModelError> {
    let numbers: Vec<Option<usize>> =
        serde_json::from_str(text).map_err(|e| ModelError::AllocationSyntax(e.to_string()))?;
    Allocation::from_numbers(inst, &numbers)
}

/// Classifies each plant as closed-or-empty, undersubscribed or full.
///
/// With a location, an open empty plant counts as undersubscribed.
pub fn occupancy_state(
    inst: &Instance,
    alloc: &Allocation,
    loc: Option<&Location>,
) -> Result<Vec<OccupancyState>, ModelError> {
    inst.plants()
        .map(|j| {
            let occ = alloc.occupancy(j);
            let cap = inst.capacity(j);
            if occ > cap {
                return Err(ModelError::CapacityExceeded {
                    plant: j,
                    occupancy: occ,
                    capacity: cap,
                });
            }
            let declared_open = loc.map(|l| l.is_open(j)).unwrap_or(false);
            Ok(if occ == cap {
                OccupancyState::Full
            } else if occ > 0 || declared_open {
                OccupancyState::Undersubscribed
            } else {
                OccupancyState::ClosedOrEmpty
            })
        })
        .collect()
}
