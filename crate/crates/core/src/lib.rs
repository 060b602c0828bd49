//! Exact optimization toolkit for capacitated facility location with
//! customer preferences: stable MILP formulations, stability certificates,
//! combinatorial oracles and a self-contained branch-and-bound solver.

#![allow(clippy::needless_range_loop)]

pub mod bridge;
pub mod fixtures;
pub mod generator;
pub mod milp;
pub mod model;
pub mod oracles;
pub mod pipeline;
pub mod solver;
pub mod stability;

pub use model::{
    Allocation, Customer, Instance, InstanceData, Location, Mode, OccupancyState, Plant,
};
pub use milp::{BuildOptions, Formulation, MilpModel};
pub use oracles::{Permutation, ScaleGuard};
pub use solver::{Limits, MilpSolution, MilpStatus};
pub use stability::{StabilityClass, StabilityLevel, StabilityReport};
