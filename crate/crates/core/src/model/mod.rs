//! Problem data, preference order, locations and allocations.

mod allocation;
mod error;
mod ids;
mod instance;

pub use allocation::{occupancy_state, parse_allocation, Allocation, Location, OccupancyState};
pub use error::{InstanceError, ModelError, Violation};
pub use ids::{Customer, Plant};
pub use instance::{
    parse_instance, validate_instance, Instance, InstanceData, Mode, RankLookup, ValidationReport,
    Warning,
};
