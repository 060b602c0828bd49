use thiserror::Error;

use super::{Customer, Plant};

/// A single violated instance invariant, located by field and row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Field path such as `pref[3]` (rows are 1-based).
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid instance: {}{}", .0[0], if .0.len() > 1 { format!(" (and {} more)", .0.len() - 1) } else { String::new() })]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("customer {0} is out of range")]
    CustomerOutOfRange(usize),
    #[error("plant {0} is out of range")]
    PlantOutOfRange(usize),
    #[error("allocation lists {found} customers, instance has {expected}")]
    AllocationLength { expected: usize, found: usize },
    #[error("location lists {found} plants, instance has {expected}")]
    LocationLength { expected: usize, found: usize },
    #[error("customer {0} is unassigned; every customer must be assigned in cflcp mode")]
    Unassigned(Customer),
    #[error("customer {customer} does not rank plant {plant}")]
    Unranked { customer: Customer, plant: Plant },
    #[error("plant {plant} holds {occupancy} customers but its capacity is {capacity}")]
    CapacityExceeded {
        plant: Plant,
        occupancy: u32,
        capacity: u32,
    },
    #[error("malformed allocation file: {0}")]
    AllocationSyntax(String),
}
