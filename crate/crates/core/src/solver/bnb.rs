use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::Serialize;

use super::incumbent;
use super::simplex::{self, CompactBasis, LpState, Simplex, StandardForm};
use super::{solve_lp, LpStatus, SolverError};
use crate::milp::{BranchClass, MilpModel, Sense};

const INT_TOL: f64 = 1e-6;
const VERIFY_TOL: f64 = 1e-7;
const LOG_EVERY: u64 = 1000;

#[derive(Debug, Clone)]
pub struct Limits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Worker threads evaluating nodes; results are deterministic only with 1.
    pub workers: usize,
    /// Bytes of stored warm starts before node selection turns depth-first.
    pub memory_cap: usize,
    /// Seed the incumbent from serial dictatorship on recognized models.
    pub heuristic: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            time_limit: None,
            node_limit: None,
            workers: 1,
            memory_cap: 256 << 20,
            heuristic: true,
        }
    }
}

impl Limits {
    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = Some(Duration::from_secs_f64(seconds));
        self
    }

    pub fn with_node_limit(mut self, nodes: u64) -> Self {
        self.node_limit = Some(nodes);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

impl MilpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MilpStatus::Optimal => "optimal",
            MilpStatus::Infeasible => "infeasible",
            MilpStatus::Unbounded => "unbounded",
            MilpStatus::Limit => "limit",
        }
    }
}

impl std::fmt::Display for MilpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bounds after `node` evaluated nodes, in the model's sense.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProgressPoint {
    pub node: u64,
    /// Lower bound on the optimum (incumbent when maximizing).
    pub lb: f64,
    /// Upper bound on the optimum (incumbent when minimizing).
    pub ub: f64,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent objective, in the model's sense.
    pub objective: Option<f64>,
    /// Proven bound on the optimum, in the model's sense.
    pub best_bound: f64,
    /// `100 (UB - LB) / LB`; `None` when no incumbent exists or LB is 0
    /// with a positive gap.
    pub gap: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub nodes: u64,
    pub wall_time: Duration,
    pub workers: usize,
    pub root_bound: Option<f64>,
    pub progress: Vec<ProgressPoint>,
}

impl MilpSolution {
    pub fn lb(&self) -> f64 {
        match self.objective {
            Some(obj) if self.best_bound > obj => obj,
            _ => self.best_bound,
        }
    }
}

/// `100 (ub - lb) / lb`.
pub fn gap_pct(lb: f64, ub: f64) -> Option<f64> {
    if !lb.is_finite() || !ub.is_finite() {
        return None;
    }
    let diff = (ub - lb).max(0.0);
    if diff <= 1e-9 * (1.0 + ub.abs()) {
        return Some(0.0);
    }
    if lb.abs() <= 1e-12 {
        return None;
    }
    Some(100.0 * diff / lb.abs())
}

pub fn solve_milp(model: &MilpModel, limits: &Limits) -> Result<MilpSolution, SolverError> {
    solve_milp_with(model, limits, &[])
}

/// Like [`solve_milp`], with extra candidate incumbents (full value vectors).
/// Candidates failing verification are ignored.
pub fn solve_milp_with(
    model: &MilpModel,
    limits: &Limits,
    candidates: &[Vec<f64>],
) -> Result<MilpSolution, SolverError> {
    let ctx = Context::new(model, limits);
    let shared = Mutex::new(Shared::new());
    let signal = Condvar::new();
    {
        let mut sh = shared.lock().unwrap();
        for c in candidates {
            if c.len() != model.num_vars() {
                return Err(SolverError::WrongLength {
                    model: model.name().to_string(),
                    expected: model.num_vars(),
                });
            }
            if let Some(v) = ctx.polish(c)? {
                sh.offer(&ctx, v);
            }
        }
        let seq = sh.next_seq();
        sh.push(&ctx, Node::root(seq));
    }
    let workers = limits.workers.max(1);
    if workers == 1 {
        worker(&ctx, &shared, &signal);
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| worker(&ctx, &shared, &signal));
            }
        });
    }
    let sh = shared.into_inner().unwrap();
    sh.finish(&ctx, workers)
}

struct Context<'a> {
    model: &'a MilpModel,
    sf: StandardForm,
    integer: Vec<bool>,
    class: Vec<BranchClass>,
    integral_objective: bool,
    limits: Limits,
    start: Instant,
}

impl<'a> Context<'a> {
    fn new(model: &'a MilpModel, limits: &Limits) -> Self {
        let sf = StandardForm::from_model(model);
        let integer: Vec<bool> = model.variables().iter().map(|v| v.integer).collect();
        let integral_objective = model
            .variables()
            .iter()
            .all(|v| v.objective == 0 || v.integer);
        Context {
            model,
            sf,
            integer,
            class: model.variables().iter().map(|v| v.class).collect(),
            integral_objective,
            limits: limits.clone(),
            start: Instant::now(),
        }
    }

    /// Model objective converted to minimization.
    fn min_objective(&self, values: &[f64]) -> f64 {
        self.sf.sign * self.model.objective_value(values)
    }

    fn to_model(&self, v: f64) -> f64 {
        self.sf.sign * v
    }

    /// True when no point in a node with this bound can beat `incumbent`.
    fn prunable(&self, bound: f64, incumbent: Option<f64>) -> bool {
        match incumbent {
            None => false,
            Some(inc) if self.integral_objective => bound > inc - 1.0 + INT_TOL,
            Some(inc) => bound >= inc - 1e-9 * (1.0 + inc.abs()),
        }
    }

    fn node_bounds(&self, changes: &[(usize, f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.sf.lower.clone();
        let mut hi = self.sf.upper.clone();
        for &(k, l, h) in changes {
            lo[k] = l;
            hi[k] = h;
        }
        (lo, hi)
    }

    fn evaluate(&self, node: &Node) -> Result<Eval, SolverError> {
        let warm = match &node.warm {
            Warm::Full(st) => {
                let mut spx = Simplex::with_state(&self.sf, (**st).clone());
                let change: Vec<_> = node.changes.last().copied().into_iter().collect();
                spx.solve_warm(&change).map(|o| (o, spx.into_state()))
            }
            Warm::Compact(basis) => {
                let (lo, hi) = self.node_bounds(&node.changes);
                Simplex::resume(&self.sf, basis, lo, hi).and_then(|mut spx| {
                    spx.solve_warm(&[]).map(|o| (o, spx.into_state()))
                })
            }
            Warm::Cold => Err(simplex::NumericalFailure(String::new())),
        };
        let (out, state) = match warm {
            Ok(r) => r,
            Err(e) => {
                if !e.0.is_empty() {
                    log::debug!("warm start failed ({}); solving node from scratch", e.0);
                }
                let (lo, hi) = self.node_bounds(&node.changes);
                let mut spx = Simplex::cold(&self.sf, lo, hi);
                let out = spx
                    .solve_cold()
                    .map_err(|e| SolverError::numerical(self.model, e.0))?;
                (out, spx.into_state())
            }
        };
        Ok(match out.status {
            simplex::LpStatus::Infeasible => Eval::Infeasible,
            simplex::LpStatus::Unbounded => Eval::Unbounded,
            simplex::LpStatus::Optimal => Eval::Solved {
                objective: out.objective,
                state,
            },
        })
    }

    /// Most fractional integer variable of the highest-priority class.
    fn select_branch(&self, x: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(BranchClass, f64, usize)> = None;
        for k in 0..self.sf.n {
            if !self.integer[k] {
                continue;
            }
            let v = x[k];
            let f = v - v.floor();
            let dist = f.min(1.0 - f);
            if dist <= INT_TOL {
                continue;
            }
            let better = match best {
                None => true,
                Some((c, d, _)) => self.class[k] < c || (self.class[k] == c && dist > d),
            };
            if better {
                best = Some((self.class[k], dist, k));
            }
        }
        best.map(|(_, _, k)| (k, x[k]))
    }

    /// Rounds integer variables and re-verifies against the original model;
    /// re-solves the continuous part when rounding leaves residuals.
    fn polish(&self, x: &[f64]) -> Result<Option<Vec<f64>>, SolverError> {
        let mut v = x[..self.sf.n].to_vec();
        for k in 0..self.sf.n {
            if self.integer[k] {
                if (v[k] - v[k].round()).abs() > INT_TOL {
                    return Ok(None);
                }
                v[k] = v[k].round();
            }
        }
        if self.model.max_violation(&v).0 <= VERIFY_TOL {
            return Ok(Some(v));
        }
        if self.integer.iter().all(|&b| b) {
            return Ok(None);
        }
        let fixings: Vec<(usize, i64)> = (0..self.sf.n)
            .filter(|&k| self.integer[k])
            .map(|k| (k, v[k] as i64))
            .collect();
        let lp = solve_lp(&self.model.with_fixed(&fixings))?;
        if lp.status != LpStatus::Optimal || self.model.max_violation(&lp.values).0 > VERIFY_TOL {
            return Ok(None);
        }
        Ok(Some(lp.values))
    }

    fn limit_hit(&self, nodes: u64) -> bool {
        self.limits.node_limit.is_some_and(|cap| nodes >= cap)
            || self
                .limits
                .time_limit
                .is_some_and(|t| self.start.elapsed() >= t)
    }
}

enum Eval {
    Infeasible,
    Unbounded,
    Solved { objective: f64, state: LpState },
}

enum Warm {
    Cold,
    Full(Arc<LpState>),
    Compact(Arc<CompactBasis>),
}

struct Node {
    /// Lower bound inherited from the parent (minimization form).
    bound: f64,
    seq: u64,
    changes: Vec<(usize, f64, f64)>,
    warm: Warm,
    memory: usize,
}

impl Node {
    fn root(seq: u64) -> Self {
        Node {
            bound: f64::NEG_INFINITY,
            seq,
            changes: Vec::new(),
            warm: Warm::Cold,
            memory: 0,
        }
    }

    fn is_root(&self) -> bool {
        self.changes.is_empty()
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Limit,
    Unbounded,
}

struct Shared {
    heap: BinaryHeap<Node>,
    stack: Vec<Node>,
    depth_first: bool,
    memory: usize,
    in_flight: Vec<(u64, f64)>,
    incumbent: Option<(f64, Vec<f64>)>,
    nodes: u64,
    seq: u64,
    stop: Option<Stop>,
    error: Option<SolverError>,
    root_bound: Option<f64>,
    progress: Vec<ProgressPoint>,
    last_lb: f64,
}

impl Shared {
    fn new() -> Self {
        Shared {
            heap: BinaryHeap::new(),
            stack: Vec::new(),
            depth_first: false,
            memory: 0,
            in_flight: Vec::new(),
            incumbent: None,
            nodes: 0,
            seq: 0,
            stop: None,
            error: None,
            root_bound: None,
            progress: Vec::new(),
            last_lb: f64::NEG_INFINITY,
        }
    }

    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn push(&mut self, ctx: &Context, node: Node) {
        self.memory += node.memory;
        if !self.depth_first && self.memory > ctx.limits.memory_cap {
            log::info!(
                "open-node memory {} MiB over cap; switching to depth-first",
                self.memory >> 20
            );
            self.depth_first = true;
        }
        if self.depth_first {
            self.stack.push(node);
        } else {
            self.heap.push(node);
        }
    }

    fn pop(&mut self) -> Option<Node> {
        let node = self.stack.pop().or_else(|| self.heap.pop())?;
        self.memory -= node.memory;
        Some(node)
    }

    fn incumbent_value(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(v, _)| *v)
    }

    /// Minimization-form bound over all unexplored work.
    fn global_lb(&self) -> f64 {
        let open = self
            .heap
            .peek()
            .map(|n| n.bound)
            .into_iter()
            .chain(self.stack.iter().map(|n| n.bound))
            .chain(self.in_flight.iter().map(|&(_, b)| b))
            .fold(f64::INFINITY, f64::min);
        let lb = match self.incumbent_value() {
            Some(inc) => open.min(inc),
            None => open,
        };
        lb.max(self.last_lb)
    }

    /// Installs a verified candidate when it improves the incumbent.
    fn offer(&mut self, ctx: &Context, values: Vec<f64>) -> bool {
        let obj = ctx.min_objective(&values);
        let better = self
            .incumbent_value()
            .map_or(true, |inc| obj < inc - 1e-9 * (1.0 + inc.abs()));
        if better {
            self.incumbent = Some((obj, values));
        }
        better
    }

    fn record(&mut self, ctx: &Context, force_log: bool) {
        let lb = self.global_lb();
        self.last_lb = lb;
        let ub = self.incumbent_value().unwrap_or(f64::INFINITY);
        let (mlb, mub) = match ctx.model.sense() {
            Sense::Minimize => (lb, ub),
            Sense::Maximize => (-ub, -lb),
        };
        let point = ProgressPoint {
            node: self.nodes,
            lb: mlb,
            ub: mub,
        };
        if self.progress.last().map_or(true, |p| p.lb != mlb || p.ub != mub) {
            self.progress.push(point);
        }
        if force_log || self.nodes % LOG_EVERY == 0 {
            log::info!(
                "node={} lb={} ub={} gap={}%",
                self.nodes,
                fmt_value(mlb),
                fmt_value(mub),
                gap_pct(mlb, mub).map_or("inf".to_string(), |g| format!("{g:.2}"))
            );
        }
    }

    fn finish(self, ctx: &Context, workers: usize) -> Result<MilpSolution, SolverError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let wall_time = ctx.start.elapsed();
        let root_bound = self.root_bound.map(|b| ctx.to_model(b));
        let objective = self.incumbent.as_ref().map(|(v, _)| ctx.to_model(*v));
        let values = self.incumbent.as_ref().map(|(_, x)| x.clone());
        let exhausted = self.heap.is_empty() && self.stack.is_empty();
        let status = match self.stop {
            Some(Stop::Unbounded) => MilpStatus::Unbounded,
            Some(Stop::Limit) if !exhausted => MilpStatus::Limit,
            _ if objective.is_some() => MilpStatus::Optimal,
            _ => MilpStatus::Infeasible,
        };
        let best_bound = match status {
            MilpStatus::Optimal => objective.unwrap(),
            MilpStatus::Infeasible => ctx.to_model(f64::INFINITY),
            MilpStatus::Unbounded => ctx.to_model(f64::NEG_INFINITY),
            MilpStatus::Limit => ctx.to_model(self.global_lb()),
        };
        let gap = objective.and_then(|obj| match ctx.model.sense() {
            Sense::Minimize => gap_pct(best_bound, obj),
            Sense::Maximize => gap_pct(obj, best_bound),
        });
        log::info!(
            "status={} nodes={} objective={} bound={} time={:.3}s workers={}",
            status,
            self.nodes,
            objective.map_or("none".to_string(), fmt_value),
            fmt_value(best_bound),
            wall_time.as_secs_f64(),
            workers
        );
        Ok(MilpSolution {
            status,
            objective,
            best_bound,
            gap,
            values,
            nodes: self.nodes,
            wall_time,
            workers,
            root_bound,
            progress: self.progress,
        })
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        let s = format!("{v:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".to_string() } else { s.to_string() }
    }
}

fn worker(ctx: &Context, shared: &Mutex<Shared>, signal: &Condvar) {
    loop {
        let node = {
            let mut sh = shared.lock().unwrap();
            loop {
                if sh.stop.is_some() || sh.error.is_some() {
                    signal.notify_all();
                    return;
                }
                if ctx.limit_hit(sh.nodes) && (!sh.heap.is_empty() || !sh.stack.is_empty()) {
                    sh.stop = Some(Stop::Limit);
                    continue;
                }
                if let Some(node) = sh.pop() {
                    if ctx.prunable(node.bound, sh.incumbent_value()) {
                        continue;
                    }
                    sh.in_flight.push((node.seq, node.bound));
                    break node;
                }
                if sh.in_flight.is_empty() {
                    signal.notify_all();
                    return;
                }
                sh = signal.wait(sh).unwrap();
            }
        };
        let outcome = process(ctx, shared, &node);
        let mut sh = shared.lock().unwrap();
        sh.in_flight.retain(|&(s, _)| s != node.seq);
        sh.nodes += 1;
        match outcome {
            Ok(Processed::Done { improved }) => sh.record(ctx, improved),
            Ok(Processed::Branch {
                bound,
                children,
                state,
            }) => {
                let use_full = sh.memory <= ctx.limits.memory_cap;
                let warm_bytes;
                let warm = if use_full {
                    warm_bytes = state.memory_bytes();
                    let st = Arc::from(state);
                    (Some(st), None)
                } else {
                    let c = state.compact();
                    warm_bytes = c.memory_bytes();
                    (None, Some(Arc::new(c)))
                };
                let n_children = children.len();
                let mut built = Vec::with_capacity(n_children);
                for change in children {
                    let mut changes = node.changes.clone();
                    changes.push(change);
                    let warm = match &warm {
                        (Some(st), _) => Warm::Full(Arc::clone(st)),
                        (_, Some(c)) => Warm::Compact(Arc::clone(c)),
                        _ => unreachable!(),
                    };
                    let seq = sh.next_seq();
                    built.push(Node {
                        bound,
                        seq,
                        changes,
                        warm,
                        memory: warm_bytes / n_children,
                    });
                }
                // Preferred child first in best-bound order, last on the stack.
                if sh.depth_first {
                    built.reverse();
                }
                for child in built {
                    sh.push(ctx, child);
                }
                sh.record(ctx, false);
            }
            Ok(Processed::Unbounded) => {
                sh.stop = Some(Stop::Unbounded);
            }
            Err(e) => {
                sh.error = Some(e);
            }
        }
        signal.notify_all();
    }
}

enum Processed {
    Done {
        improved: bool,
    },
    Branch {
        bound: f64,
        /// Bound changes, preferred child first.
        children: Vec<(usize, f64, f64)>,
        state: Box<LpState>,
    },
    Unbounded,
}

fn process(ctx: &Context, shared: &Mutex<Shared>, node: &Node) -> Result<Processed, SolverError> {
    let (objective, state) = match ctx.evaluate(node)? {
        Eval::Infeasible => return Ok(Processed::Done { improved: false }),
        Eval::Unbounded => return Ok(Processed::Unbounded),
        Eval::Solved { objective, state } => (objective, state),
    };
    let bound = objective.max(node.bound);
    let mut improved = false;
    if node.is_root() {
        let x = &state.x[..ctx.sf.n];
        let mut seeds = Vec::new();
        if ctx.limits.heuristic {
            seeds = incumbent::candidates(ctx.model, x);
        }
        let mut polished = Vec::new();
        for s in &seeds {
            if let Some(v) = ctx.polish(s)? {
                polished.push(v);
            }
        }
        let mut sh = shared.lock().unwrap();
        sh.root_bound = Some(objective);
        for v in polished {
            if sh.offer(ctx, v) {
                improved = true;
            }
        }
        if improved {
            log::debug!(
                "serial-dictatorship incumbent {}",
                fmt_value(ctx.to_model(sh.incumbent_value().unwrap()))
            );
        }
    }
    let incumbent = shared.lock().unwrap().incumbent_value();
    if ctx.prunable(bound, incumbent) {
        return Ok(Processed::Done { improved });
    }
    let x = &state.x[..ctx.sf.n];
    match ctx.select_branch(x) {
        None => {
            if let Some(v) = ctx.polish(x)? {
                let mut sh = shared.lock().unwrap();
                if sh.offer(ctx, v) {
                    improved = true;
                }
            } else {
                log::warn!(
                    "integral LP point failed verification at {VERIFY_TOL}; node dropped"
                );
            }
            Ok(Processed::Done { improved })
        }
        Some((k, v)) => {
            let (lo, hi) = (state.lower[k], state.upper[k]);
            let down = (k, lo, v.floor());
            let up = (k, v.ceil(), hi);
            let children = if v - v.floor() >= 0.5 {
                vec![up, down]
            } else {
                vec![down, up]
            };
            if improved {
                shared.lock().unwrap().record(ctx, true);
            }
            Ok(Processed::Branch {
                bound,
                children,
                state: Box::new(state),
            })
        }
    }
}
