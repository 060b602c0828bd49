//! Generic MILP representation and the stable-allocation formulations.
//!
//! Variable names: `y_{j}`, `x_{i}_{j}`, `u_{j}`, `v_{j}_{j2}`,
//! `xr_{i}_{j}_{r}`, `ur_{j}_{r}`, all 1-based.

mod formulations;
mod lift;
mod model;

use thiserror::Error;

use crate::model::{Mode, ModelError};
use crate::stability::StabilityLevel;

pub use formulations::{
    build, build_cc, build_cc_r, build_cha_po, build_cs, build_cs_r, build_pw, build_pw_r,
    build_second_level, BuildOptions,
};
pub use lift::{decode, lift_allocation, lift_serial_dictatorship};
pub use model::{BranchClass, Constraint, MilpModel, ModelOrigin, Relation, Sense, Variable};

#[derive(Debug, Error, PartialEq)]
pub enum MilpError {
    #[error("formulation {formulation} requires a {expected} instance, got {found}")]
    WrongMode {
        formulation: &'static str,
        expected: &'static str,
        found: &'static str,
    },
    #[error("duplicate name {0}")]
    DuplicateName(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} has lower bound above upper bound")]
    BadBounds(String),
    #[error("open capacity {capacity} cannot serve {customers} customers")]
    InfeasibleLocation { capacity: u64, customers: usize },
    #[error("variable {0} is fractional in a solution that must be integral")]
    Fractional(String),
    #[error("model carries no instance origin")]
    NoOrigin,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The stable-allocation formulations plus the auxiliary second-level model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formulation {
    Cs,
    CsR,
    Pw,
    PwR,
    Cc,
    CcR,
    ChaPo,
    SecondLevel,
}

impl Formulation {
    /// The seven stable formulations, in CLI order.
    pub const STABLE: [Formulation; 7] = [
        Formulation::Cs,
        Formulation::CsR,
        Formulation::Pw,
        Formulation::PwR,
        Formulation::Cc,
        Formulation::CcR,
        Formulation::ChaPo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::Cs => "cs",
            Formulation::CsR => "cs-r",
            Formulation::Pw => "pw",
            Formulation::PwR => "pw-r",
            Formulation::Cc => "cc",
            Formulation::CcR => "cc-r",
            Formulation::ChaPo => "cha-po",
            Formulation::SecondLevel => "second-level",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        let norm = name.trim().to_ascii_lowercase().replace('_', "-");
        Self::STABLE.into_iter().find(|f| f.name() == norm)
    }

    /// The stability level every feasible allocation meets.
    pub fn level(self) -> Option<StabilityLevel> {
        match self {
            Formulation::Cs | Formulation::CsR => Some(StabilityLevel::Customer),
            Formulation::Pw | Formulation::PwR => Some(StabilityLevel::Pairwise),
            Formulation::Cc | Formulation::CcR | Formulation::ChaPo => {
                Some(StabilityLevel::CyclicCoalition)
            }
            Formulation::SecondLevel => None,
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Formulation::ChaPo => Mode::Cha,
            _ => Mode::Cflcp,
        }
    }

    pub fn is_reduced(self) -> bool {
        matches!(
            self,
            Formulation::CsR | Formulation::PwR | Formulation::CcR | Formulation::ChaPo
        )
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests;
