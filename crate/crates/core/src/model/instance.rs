use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::error::{InstanceError, ModelError, Violation};
use super::{Customer, Plant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Facility location: complete strict preference lists, full assignment.
    #[default]
    Cflcp,
    /// Capacitated house allocation: lists may be partial, customers may stay unassigned.
    Cha,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cflcp => "cflcp",
            Mode::Cha => "cha",
        }
    }
}

/// The on-disk shape of an instance. Plant ids in `pref` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceData {
    #[serde(default)]
    pub mode: Mode,
    pub open_cost: Vec<u64>,
    pub assign_cost: Vec<Vec<u64>>,
    pub capacity: Vec<u32>,
    pub pref: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// Total capacity is below the number of customers.
    InsufficientCapacity { total: u64, customers: usize },
    /// Every plant can hold every customer, so capacities never bind.
    Uncapacitated,
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::InsufficientCapacity { total, customers } => write!(
                f,
                "globally infeasible for cflcp: total capacity {total} < {customers} customers"
            ),
            Warning::Uncapacitated => {
                write!(f, "uncapacitated: every plant can hold all customers")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn violation(report: &mut ValidationReport, field: String, message: String) {
    report.violations.push(Violation { field, message });
}

/// Checks every structural invariant of `data` and reports capacity warnings.
pub fn validate_instance(data: &InstanceData) -> ValidationReport {
    let mut report = ValidationReport::default();
    let m = data.open_cost.len();
    let n = data.assign_cost.len();

    if data.capacity.len() != m {
        violation(
            &mut report,
            "capacity".into(),
            format!("has {} entries, expected {m}", data.capacity.len()),
        );
    }
    if data.pref.len() != n {
        violation(
            &mut report,
            "pref".into(),
            format!("has {} rows, assign_cost has {n}", data.pref.len()),
        );
    }
    for (i, row) in data.assign_cost.iter().enumerate() {
        if row.len() != m {
            violation(
                &mut report,
                format!("assign_cost[{}]", i + 1),
                format!("has {} entries, expected {m}", row.len()),
            );
        }
    }
    for (j, &c) in data.capacity.iter().enumerate() {
        if c == 0 {
            violation(
                &mut report,
                format!("capacity[{}]", j + 1),
                "must be at least 1".into(),
            );
        }
    }
    for (i, list) in data.pref.iter().enumerate() {
        let field = format!("pref[{}]", i + 1);
        let mut seen = vec![false; m];
        for &p in list {
            if p == 0 || p > m {
                violation(
                    &mut report,
                    field.clone(),
                    format!("plant {p} out of range 1..={m}"),
                );
            } else if seen[p - 1] {
                violation(&mut report, field.clone(), format!("duplicate plant {p}"));
            } else {
                seen[p - 1] = true;
            }
        }
        if data.mode == Mode::Cflcp && list.len() != m {
            violation(
                &mut report,
                field,
                format!(
                    "ranks {} plants; cflcp mode needs a complete list of {m}",
                    list.len()
                ),
            );
        }
    }

    let total: u64 = data.capacity.iter().map(|&c| c as u64).sum();
    if n > 0 && total < n as u64 {
        report.warnings.push(Warning::InsufficientCapacity {
            total,
            customers: n,
        });
    }
    if m > 0 && data.capacity.iter().all(|&c| c as usize >= n) {
        report.warnings.push(Warning::Uncapacitated);
    }
    report
}

/// Dense customer x plant rank table; 0 marks an unranked pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankLookup {
    n_plants: usize,
    ranks: Vec<u32>,
}

impl RankLookup {
    fn build(n: usize, m: usize, pref: &[Vec<Plant>]) -> Self {
        let mut ranks = vec![0u32; n * m];
        for (i, list) in pref.iter().enumerate() {
            for (pos, p) in list.iter().enumerate() {
                ranks[i * m + p.index()] = pos as u32 + 1;
            }
        }
        RankLookup { n_plants: m, ranks }
    }

    /// 1-based rank, or `None` when the customer does not rank the plant.
    #[inline]
    pub fn get(&self, i: Customer, j: Plant) -> Option<u32> {
        match self.ranks[i.index() * self.n_plants + j.index()] {
            0 => None,
            r => Some(r),
        }
    }
}

/// A validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    mode: Mode,
    open_cost: Vec<u64>,
    assign_cost: Vec<Vec<u64>>,
    capacity: Vec<u32>,
    pref: Vec<Vec<Plant>>,
    rank: RankLookup,
}

impl Instance {
    pub fn from_data(data: InstanceData) -> Result<Self, InstanceError> {
        let report = validate_instance(&data);
        if !report.is_valid() {
            return Err(InstanceError::Invalid(report.violations));
        }
        let n = data.assign_cost.len();
        let m = data.open_cost.len();
        let pref: Vec<Vec<Plant>> = data
            .pref
            .iter()
            .map(|l| l.iter().map(|&p| Plant(p - 1)).collect())
            .collect();
        let rank = RankLookup::build(n, m, &pref);
        Ok(Instance {
            mode: data.mode,
            open_cost: data.open_cost,
            assign_cost: data.assign_cost,
            capacity: data.capacity,
            pref,
            rank,
        })
    }

    pub fn to_data(&self) -> InstanceData {
        InstanceData {
            mode: self.mode,
            open_cost: self.open_cost.clone(),
            assign_cost: self.assign_cost.clone(),
            capacity: self.capacity.clone(),
            pref: self
                .pref
                .iter()
                .map(|l| l.iter().map(|p| p.number()).collect())
                .collect(),
        }
    }

    pub fn validation(&self) -> ValidationReport {
        validate_instance(&self.to_data())
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_customers(&self) -> usize {
        self.assign_cost.len()
    }

    pub fn n_plants(&self) -> usize {
        self.open_cost.len()
    }

    pub fn customers(&self) -> impl Iterator<Item = Customer> + Clone {
        (0..self.n_customers()).map(Customer)
    }

    pub fn plants(&self) -> impl Iterator<Item = Plant> + Clone {
        (0..self.n_plants()).map(Plant)
    }

    pub fn open_cost(&self, j: Plant) -> u64 {
        self.open_cost[j.index()]
    }

    pub fn assign_cost(&self, i: Customer, j: Plant) -> u64 {
        self.assign_cost[i.index()][j.index()]
    }

    pub fn capacity(&self, j: Plant) -> u32 {
        self.capacity[j.index()]
    }

    pub fn total_capacity(&self) -> u64 {
        self.capacity.iter().map(|&c| c as u64).sum()
    }

    /// Customer `i`'s ranked plants, most preferred first.
    pub fn pref(&self, i: Customer) -> &[Plant] {
        &self.pref[i.index()]
    }

    pub fn ranks(&self) -> &RankLookup {
        &self.rank
    }

    #[inline]
    pub fn rank(&self, i: Customer, j: Plant) -> Option<u32> {
        self.rank.get(i, j)
    }

    pub fn check_customer(&self, i: Customer) -> Result<(), ModelError> {
        if i.index() < self.n_customers() {
            Ok(())
        } else {
            Err(ModelError::CustomerOutOfRange(i.number()))
        }
    }

    pub fn check_plant(&self, j: Plant) -> Result<(), ModelError> {
        if j.index() < self.n_plants() {
            Ok(())
        } else {
            Err(ModelError::PlantOutOfRange(j.number()))
        }
    }

    /// Whether customer `i` strictly prefers `j` to `j2`.
    ///
    /// A ranked plant beats an unranked one; two unranked plants compare false.
    pub fn prefers(&self, i: Customer, j: Plant, j2: Plant) -> Result<bool, ModelError> {
        self.check_customer(i)?;
        self.check_plant(j)?;
        self.check_plant(j2)?;
        Ok(self.prefers_unchecked(i, j, j2))
    }

    #[inline]
    pub fn prefers_unchecked(&self, i: Customer, j: Plant, j2: Plant) -> bool {
        match (self.rank.get(i, j), self.rank.get(i, j2)) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        }
    }

    /// Canonical JSON: fixed key order, one array per line, LF endings.
    pub fn to_json(&self) -> String {
        let data = self.to_data();
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"mode\": \"{}\",", data.mode.as_str());
        let _ = writeln!(out, "  \"open_cost\": {},", inline_array(&data.open_cost));
        let _ = writeln!(out, "  \"assign_cost\": {},", nested_array(&data.assign_cost));
        let _ = writeln!(out, "  \"capacity\": {},", inline_array(&data.capacity));
        let _ = writeln!(out, "  \"pref\": {}", nested_array(&data.pref));
        out.push_str("}\n");
        out
    }
}

fn inline_array<T: std::fmt::Display>(values: &[T]) -> String {
    let items: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn nested_array<T: std::fmt::Display>(rows: &[Vec<T>]) -> String {
    if rows.is_empty() {
        return "[]".into();
    }
    let lines: Vec<String> = rows
        .iter()
        .map(|r| format!("    {}", inline_array(r)))
        .collect();
    format!("[\n{}\n  ]", lines.join(",\n"))
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let data: InstanceData = serde_json::from_str(text)?;
    Instance::from_data(data)
}
