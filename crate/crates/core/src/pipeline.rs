//! End-to-end runs: build a formulation, solve it, decode and classify the
//! result, and collect benchmark rows.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::generator::{generate, GenError, Preset};
use crate::milp::{build, decode, BuildOptions, Formulation, MilpError};
use crate::model::{Allocation, Instance, Location};
use crate::solver::{solve_milp, Limits, MilpSolution, MilpStatus, SolverError};
use crate::stability::{classify, StabilityClass, StabilityError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Generator(#[from] GenError),
}

/// Which integrality restrictions to drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Relax {
    #[default]
    None,
    X,
    All,
}

impl Relax {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Some(Relax::None),
            "x" => Some(Relax::X),
            "all" => Some(Relax::All),
            _ => None,
        }
    }

    pub fn options(self) -> BuildOptions {
        match self {
            Relax::None => BuildOptions::default(),
            Relax::X => BuildOptions::relax_x(),
            Relax::All => BuildOptions::relax_all(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub formulation: Formulation,
    pub solution: MilpSolution,
    /// Decoded when the incumbent is integral in x.
    pub location: Option<Location>,
    pub allocation: Option<Allocation>,
    pub class: Option<StabilityClass>,
}

/// Builds `formulation` on `inst`, solves it and classifies the decoded
/// allocation.
pub fn solve_formulation(
    inst: &Instance,
    formulation: Formulation,
    relax: Relax,
    limits: &Limits,
) -> Result<SolveReport, PipelineError> {
    let model = build(formulation, inst, &relax.options())?;
    let solution = solve_milp(&model, limits)?;
    let mut report = SolveReport {
        formulation,
        solution,
        location: None,
        allocation: None,
        class: None,
    };
    if let Some(values) = &report.solution.values {
        if let Ok((loc, alloc)) = decode(&model, values) {
            report.class = Some(classify(inst, &loc, &alloc)?.class);
            report.location = Some(loc);
            report.allocation = Some(alloc);
        }
    }
    Ok(report)
}

pub const BENCH_HEADER: &str =
    "instance,model,status,objective,root_bound,nodes,time_s,gap_pct,stability_class";

pub const SUMMARY_HEADER: &str =
    "suite,model,instances,optimal,avg_objective,avg_root_bound,avg_nodes,avg_time_s,avg_gap_pct";

pub const MONOTONE_HEADER: &str = "instance,cs,pw,cc,monotone";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub model: Formulation,
    pub status: MilpStatus,
    pub objective: Option<f64>,
    pub root_bound: Option<f64>,
    pub nodes: u64,
    pub time_s: f64,
    pub gap_pct: Option<f64>,
    pub stability_class: Option<StabilityClass>,
}

impl Serialize for Formulation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| {
        let s = format!("{x:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    })
}

impl BenchRow {
    pub fn from_report(instance: &str, report: &SolveReport) -> Self {
        let s = &report.solution;
        BenchRow {
            instance: instance.to_string(),
            model: report.formulation,
            status: s.status,
            objective: s.objective,
            root_bound: s.root_bound,
            nodes: s.nodes,
            time_s: s.wall_time.as_secs_f64(),
            gap_pct: s.gap,
            stability_class: report.class,
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{},{}",
            self.instance,
            self.model.name(),
            self.status.as_str(),
            opt_num(self.objective),
            opt_num(self.root_bound),
            self.nodes,
            self.time_s,
            opt_num(self.gap_pct),
            self.stability_class.map_or("", |c| c.as_str())
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
}

impl BenchResult {
    pub fn rows_csv(&self) -> String {
        let mut out = String::from(BENCH_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv_line());
            out.push('\n');
        }
        out
    }

    /// Per-suite, per-model averages over the instances of the suite.
    pub fn summary_csv(&self, suite: &str) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        let mut models: Vec<Formulation> = self.rows.iter().map(|r| r.model).collect();
        models.sort();
        models.dedup();
        let avg = |xs: &[f64]| -> Option<f64> {
            (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
        };
        for m in models {
            let rows: Vec<&BenchRow> = self.rows.iter().filter(|r| r.model == m).collect();
            let optimal = rows.iter().filter(|r| r.status == MilpStatus::Optimal).count();
            let col = |f: &dyn Fn(&BenchRow) -> Option<f64>| -> Vec<f64> {
                rows.iter().filter_map(|r| f(r)).collect()
            };
            let _ = writeln!(
                out,
                "{suite},{},{},{},{},{},{},{},{}",
                m.name(),
                rows.len(),
                optimal,
                opt_num(avg(&col(&|r| r.objective))),
                opt_num(avg(&col(&|r| r.root_bound))),
                opt_num(avg(&col(&|r| Some(r.nodes as f64)))),
                opt_num(avg(&col(&|r| Some(r.time_s)))),
                opt_num(avg(&col(&|r| r.gap_pct))),
            );
        }
        out
    }

    /// Per instance, the optimal objectives of the first customer-, pairwise-
    /// and coalition-level models present, and whether they are
    /// non-decreasing in that order.
    pub fn monotone_csv(&self) -> String {
        let mut out = String::from(MONOTONE_HEADER);
        out.push('\n');
        let mut instances: Vec<&str> = self.rows.iter().map(|r| r.instance.as_str()).collect();
        instances.dedup();
        for inst in instances {
            let pick = |fs: &[Formulation]| {
                self.rows
                    .iter()
                    .filter(|r| r.instance == inst && fs.contains(&r.model))
                    .filter(|r| r.status == MilpStatus::Optimal)
                    .find_map(|r| r.objective)
            };
            let cs = pick(&[Formulation::Cs, Formulation::CsR]);
            let pw = pick(&[Formulation::Pw, Formulation::PwR]);
            let cc = pick(&[Formulation::Cc, Formulation::CcR]);
            let present: Vec<f64> = [cs, pw, cc].into_iter().flatten().collect();
            let monotone = present.windows(2).all(|w| w[0] <= w[1] + 1e-6);
            let _ = writeln!(
                out,
                "{inst},{},{},{},{}",
                opt_num(cs),
                opt_num(pw),
                opt_num(cc),
                monotone
            );
        }
        out
    }

    pub fn all_monotone(&self) -> bool {
        self.monotone_csv()
            .lines()
            .skip(1)
            .all(|l| l.ends_with(",true"))
    }
}

/// Runs every model on every seed of a preset.
pub fn run_bench(
    preset: &Preset,
    seeds: &[u64],
    models: &[Formulation],
    relax: Relax,
    limits: &Limits,
) -> Result<BenchResult, PipelineError> {
    let mut rows = Vec::new();
    for &seed in seeds {
        let inst = generate(&preset.params(seed))?;
        let name = format!("{}_s{seed}", preset.name());
        for &f in models {
            let report = solve_formulation(&inst, f, relax, limits)?;
            let row = BenchRow::from_report(&name, &report);
            log::info!("{}", row.csv_line());
            rows.push(row);
        }
    }
    Ok(BenchResult { rows })
}
