use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::ControlFlow;

use super::enumerate::for_each_feasible_allocation;
use super::{OracleError, ScaleGuard};
use crate::model::{Allocation, Instance, Location, Mode, Plant};

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: i64,
}

/// Min-cost flow by successive shortest paths with Johnson potentials.
/// Edge costs must be non-negative.
#[derive(Debug, Clone, Default)]
pub struct MinCostFlow {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
        }
    }

    /// Adds `from -> to` and returns its edge id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        debug_assert!(cost >= 0);
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently on edge `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.edges[id + 1].cap
    }

    /// Sends up to `limit` units from `s` to `t`; returns (flow, cost).
    pub fn run(&mut self, s: usize, t: usize, limit: i64) -> (i64, i64) {
        let nodes = self.adj.len();
        let mut potential = vec![0i64; nodes];
        let (mut flow, mut cost) = (0i64, 0i64);
        while flow < limit {
            let mut dist = vec![i64::MAX; nodes];
            let mut via = vec![usize::MAX; nodes];
            dist[s] = 0;
            let mut heap = BinaryHeap::from([Reverse((0i64, s))]);
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap <= 0 {
                        continue;
                    }
                    let nd = d + edge.cost + potential[u] - potential[edge.to];
                    if nd < dist[edge.to] {
                        dist[edge.to] = nd;
                        via[edge.to] = e;
                        heap.push(Reverse((nd, edge.to)));
                    }
                }
            }
            if dist[t] == i64::MAX {
                break;
            }
            for v in 0..nodes {
                if dist[v] != i64::MAX {
                    potential[v] += dist[v];
                }
            }
            let mut push = limit - flow;
            let mut v = t;
            while v != s {
                let e = via[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                cost += push * self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
        }
        (flow, cost)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondLevelSolution {
    pub allocation: Allocation,
    /// Σ p_ij over the allocation.
    pub pref_value: u64,
    /// Σ g_ij over the allocation.
    pub cost_value: u64,
}

fn require_cflcp(inst: &Instance) -> Result<(), OracleError> {
    if inst.mode() != Mode::Cflcp {
        return Err(OracleError::WrongMode);
    }
    Ok(())
}

fn require_capacity(inst: &Instance, loc: &Location) -> Result<(), OracleError> {
    let capacity = loc.open_capacity(inst);
    if capacity < inst.n_customers() as u64 {
        return Err(OracleError::InsufficientCapacity {
            capacity,
            customers: inst.n_customers(),
        });
    }
    Ok(())
}

/// An allocation minimizing total rank for a fixed location.
pub fn second_level_assign(
    inst: &Instance,
    loc: &Location,
) -> Result<SecondLevelSolution, OracleError> {
    require_cflcp(inst)?;
    loc.check(inst)?;
    require_capacity(inst, loc)?;
    let n = inst.n_customers();
    let m = inst.n_plants();
    let (source, sink) = (n + m, n + m + 1);
    let mut net = MinCostFlow::new(n + m + 2);
    let mut arcs = Vec::new();
    for i in inst.customers() {
        net.add_edge(source, i.index(), 1, 0);
        for j in loc.open_plants() {
            let rank = inst.rank(i, j).expect("complete lists") as i64;
            arcs.push((i, j, net.add_edge(i.index(), n + j.index(), 1, rank)));
        }
    }
    for j in loc.open_plants() {
        net.add_edge(n + j.index(), sink, inst.capacity(j) as i64, 0);
    }
    let (flow, _) = net.run(source, sink, n as i64);
    debug_assert_eq!(flow, n as i64);
    let mut assigned: Vec<Option<Plant>> = vec![None; n];
    for (i, j, e) in arcs {
        if net.flow(e) > 0 {
            assigned[i.index()] = Some(j);
        }
    }
    let allocation = Allocation::from_assignments(inst, assigned)?;
    Ok(SecondLevelSolution {
        pref_value: allocation.pref_value(inst),
        cost_value: allocation.assignment_cost(inst),
        allocation,
    })
}

/// Whether `alloc` attains the minimum total rank for `loc`.
pub fn is_second_level_optimal(
    inst: &Instance,
    loc: &Location,
    alloc: &Allocation,
) -> Result<bool, OracleError> {
    let best = second_level_assign(inst, loc)?;
    Ok(alloc.pref_value(inst) == best.pref_value)
}

/// All allocations minimizing total rank for `loc`, by exhaustive search.
pub fn second_level_optima(
    inst: &Instance,
    loc: &Location,
    guard: ScaleGuard,
) -> Result<(u64, Vec<Allocation>), OracleError> {
    require_cflcp(inst)?;
    guard.check(inst)?;
    loc.check(inst)?;
    require_capacity(inst, loc)?;
    let mut best = u64::MAX;
    let mut optima: Vec<Vec<Option<Plant>>> = Vec::new();
    for_each_feasible_allocation(inst, loc, |assigned, _| {
        let value: u64 = assigned
            .iter()
            .enumerate()
            .map(|(i, j)| {
                inst.rank(crate::model::Customer(i), j.expect("cflcp is complete"))
                    .expect("complete lists") as u64
            })
            .sum();
        if value < best {
            best = value;
            optima.clear();
        }
        if value == best {
            optima.push(assigned.to_vec());
        }
        ControlFlow::Continue(())
    });
    let allocs = optima
        .into_iter()
        .map(|a| Allocation::from_assignments(inst, a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((best, allocs))
}
