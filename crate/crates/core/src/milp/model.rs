use std::collections::HashMap;
use std::sync::Arc;

use super::{Formulation, MilpError};
use crate::model::{Instance, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// Branching priority, highest first: locations, fill indicators, pair
/// indicators, assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BranchClass {
    Location,
    Fill,
    Pair,
    Assignment,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    /// `None` is unbounded.
    pub lower: Option<i64>,
    pub upper: Option<i64>,
    pub integer: bool,
    pub objective: i64,
    pub class: BranchClass,
}

impl Variable {
    pub fn is_binary(&self) -> bool {
        self.integer && self.lower == Some(0) && self.upper == Some(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sparse `(variable index, coefficient)` terms, no duplicates, no zeros.
    pub terms: Vec<(usize, i64)>,
    pub relation: Relation,
    pub rhs: i64,
}

/// Where a model came from; lets the solver seed incumbents and decode
/// solutions back into allocations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOrigin {
    pub formulation: Formulation,
    pub instance: Instance,
    /// Fixed location of second-level models.
    pub location: Option<Location>,
}

/// A mixed-integer linear model with exact integer data.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub(crate) name: String,
    pub(crate) sense: Sense,
    pub(crate) variables: Vec<Variable>,
    pub(crate) constraints: Vec<Constraint>,
    pub(crate) index: HashMap<String, usize>,
    pub(crate) origin: Option<Arc<ModelOrigin>>,
}

impl PartialEq for MilpModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.sense == other.sense
            && self.variables == other.variables
            && self.constraints == other.constraints
    }
}

impl MilpModel {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        MilpModel {
            name: name.into(),
            sense,
            variables: Vec::new(),
            constraints: Vec::new(),
            index: HashMap::new(),
            origin: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn origin(&self) -> Option<&ModelOrigin> {
        self.origin.as_deref()
    }

    pub(crate) fn set_origin(&mut self, origin: ModelOrigin) {
        self.origin = Some(Arc::new(origin));
    }

    /// Adds a variable and returns its index.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: Option<i64>,
        upper: Option<i64>,
        integer: bool,
        objective: i64,
        class: BranchClass,
    ) -> Result<usize, MilpError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(MilpError::DuplicateName(name));
        }
        if let (Some(l), Some(u)) = (lower, upper) {
            if l > u {
                return Err(MilpError::BadBounds(name));
            }
        }
        let k = self.variables.len();
        self.index.insert(name.clone(), k);
        self.variables.push(Variable {
            name,
            lower,
            upper,
            integer,
            objective,
            class,
        });
        Ok(k)
    }

    /// Adds a binary variable (or a [0,1] continuous one when `relaxed`).
    pub(crate) fn add_binary(
        &mut self,
        name: String,
        objective: i64,
        class: BranchClass,
        relaxed: bool,
    ) -> usize {
        self.add_var(name, Some(0), Some(1), !relaxed, objective, class)
            .expect("builder names are unique")
    }

    /// Adds a row after merging duplicate terms and dropping zeros.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (usize, i64)>,
        relation: Relation,
        rhs: i64,
    ) -> Result<(), MilpError> {
        let name = name.into();
        let mut merged: Vec<(usize, i64)> = Vec::new();
        for (k, a) in terms {
            if k >= self.variables.len() {
                return Err(MilpError::UnknownVariable(format!("#{k} in row {name}")));
            }
            match merged.iter_mut().find(|(v, _)| *v == k) {
                Some(slot) => slot.1 += a,
                None => merged.push((k, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0);
        merged.sort_by_key(|&(k, _)| k);
        self.constraints.push(Constraint {
            name,
            terms: merged,
            relation,
            rhs,
        });
        Ok(())
    }

    pub(crate) fn row(&mut self, name: String, terms: Vec<(usize, i64)>, relation: Relation, rhs: i64) {
        self.add_constraint(name, terms, relation, rhs)
            .expect("builder rows reference declared variables");
    }

    /// Checks naming, references and bounds.
    pub fn check_well_formed(&self) -> Result<(), MilpError> {
        let mut seen = HashMap::new();
        for v in &self.variables {
            if seen.insert(v.name.as_str(), ()).is_some() {
                return Err(MilpError::DuplicateName(v.name.clone()));
            }
            if let (Some(l), Some(u)) = (v.lower, v.upper) {
                if l > u {
                    return Err(MilpError::BadBounds(v.name.clone()));
                }
            }
        }
        let mut rows = HashMap::new();
        for c in &self.constraints {
            if rows.insert(c.name.as_str(), ()).is_some() {
                return Err(MilpError::DuplicateName(c.name.clone()));
            }
            if let Some(&(k, _)) = c.terms.iter().find(|(k, _)| *k >= self.variables.len()) {
                return Err(MilpError::UnknownVariable(format!("#{k} in row {}", c.name)));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective as f64 * x)
            .sum()
    }

    pub fn row_activity(&self, row: &Constraint, values: &[f64]) -> f64 {
        row.terms.iter().map(|&(k, a)| a as f64 * values[k]).sum()
    }

    /// Largest violation over rows and bounds, with the offending row name
    /// (or variable name for bounds).
    pub fn max_violation(&self, values: &[f64]) -> (f64, Option<String>) {
        let mut worst = (0.0, None);
        for row in &self.constraints {
            let lhs = self.row_activity(row, values);
            let rhs = row.rhs as f64;
            let viol = match row.relation {
                Relation::Le => lhs - rhs,
                Relation::Ge => rhs - lhs,
                Relation::Eq => (lhs - rhs).abs(),
            };
            if viol > worst.0 {
                worst = (viol, Some(row.name.clone()));
            }
        }
        for (v, &x) in self.variables.iter().zip(values) {
            let lo = v.lower.map_or(0.0, |l| l as f64 - x);
            let hi = v.upper.map_or(0.0, |u| x - u as f64);
            let viol = lo.max(hi);
            if viol > worst.0 {
                worst = (viol, Some(v.name.clone()));
            }
        }
        worst
    }

    /// Largest distance to the nearest integer over integer variables.
    pub fn max_fractionality(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .filter(|(v, _)| v.integer)
            .map(|(_, x)| (x - x.round()).abs())
            .fold(0.0, f64::max)
    }

    /// A copy with the given variables fixed (bounds set to the value).
    pub fn with_fixed(&self, fixings: &[(usize, i64)]) -> MilpModel {
        let mut out = self.clone();
        for &(k, val) in fixings {
            out.variables[k].lower = Some(val);
            out.variables[k].upper = Some(val);
        }
        out
    }

    /// A copy with every integrality flag dropped.
    pub fn relaxed(&self) -> MilpModel {
        let mut out = self.clone();
        for v in &mut out.variables {
            v.integer = false;
        }
        out
    }

    /// A copy with integrality dropped on variables of class `class`.
    pub fn relaxed_class(&self, class: BranchClass) -> MilpModel {
        let mut out = self.clone();
        for v in out.variables.iter_mut().filter(|v| v.class == class) {
            v.integer = false;
        }
        out
    }
}
