//! Combinatorial ground truth: serial dictatorship, exhaustive enumeration,
//! the rank-minimizing second level by min-cost flow, the bilevel baseline
//! and brute-force optima.

mod bilevel;
mod brute;
mod enumerate;
mod flow;
mod serial;

use thiserror::Error;

use crate::milp::MilpError;
use crate::model::{Instance, ModelError};
use crate::stability::StabilityError;

pub use bilevel::{bilevel_baseline, bilevel_for_location, BilevelSolution};
pub use brute::{brute_force_optimum, BruteForceOptimum};
pub(crate) use brute::locations_lex;
pub use enumerate::{
    all_feasible_allocations, enumerate_cc_stable, enumerate_stable, for_each_feasible_allocation,
};
pub use flow::{
    is_second_level_optimal, second_level_assign, second_level_optima, MinCostFlow,
    SecondLevelSolution,
};
pub use serial::{serial_dictatorship, Permutation};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("not a permutation of the customers: {0:?}")]
    NotAPermutation(Vec<usize>),
    #[error("open capacity {capacity} cannot serve {customers} customers")]
    InsufficientCapacity { capacity: u64, customers: usize },
    #[error("operation requires a cflcp-mode instance")]
    WrongMode,
    #[error("instance with {customers} customers and {plants} plants exceeds the guard of {max_customers} customers and {max_plants} plants")]
    ScaleGuard {
        customers: usize,
        plants: usize,
        max_customers: usize,
        max_plants: usize,
    },
    #[error("no location has enough capacity for all customers")]
    NoFeasibleLocation,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("solver: {0}")]
    Solver(String),
}

/// Size limits for exhaustive routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleGuard {
    pub max_customers: usize,
    pub max_plants: usize,
}

impl ScaleGuard {
    pub const UNLIMITED: ScaleGuard = ScaleGuard {
        max_customers: usize::MAX,
        max_plants: usize::MAX,
    };

    /// Default for enumerating allocations of one location.
    pub fn enumeration() -> Self {
        ScaleGuard {
            max_customers: 10,
            max_plants: usize::MAX,
        }
    }

    /// Default for brute-force optima over all locations.
    pub fn brute_force() -> Self {
        ScaleGuard {
            max_customers: 8,
            max_plants: 4,
        }
    }

    /// Default for location enumeration in the bilevel baseline.
    pub fn bilevel() -> Self {
        ScaleGuard {
            max_customers: usize::MAX,
            max_plants: 20,
        }
    }

    pub fn check(&self, inst: &Instance) -> Result<(), OracleError> {
        if inst.n_customers() > self.max_customers || inst.n_plants() > self.max_plants {
            return Err(OracleError::ScaleGuard {
                customers: inst.n_customers(),
                plants: inst.n_plants(),
                max_customers: self.max_customers,
                max_plants: self.max_plants,
            });
        }
        Ok(())
    }
}
