use std::collections::VecDeque;

use crate::model::{Allocation, Customer, Instance, Plant};

/// Arc `j -> j2` exists when some customer at `j` strictly prefers `j2`.
/// Nodes are the plants hosting at least one customer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImprovementDigraph {
    m: usize,
    nodes: Vec<Plant>,
    /// Row-major `m x m`; the smallest witness customer per arc.
    witness: Vec<Option<Customer>>,
}

impl ImprovementDigraph {
    pub fn build(inst: &Instance, alloc: &Allocation) -> Self {
        let m = inst.n_plants();
        let mut witness = vec![None; m * m];
        let nodes: Vec<Plant> = inst.plants().filter(|&j| alloc.occupancy(j) > 0).collect();
        // Customers are scanned in ascending order, so the first witness wins.
        for (i, j) in alloc.pairs() {
            for &j2 in inst.pref(i) {
                if j2 == j {
                    break;
                }
                if alloc.occupancy(j2) > 0 {
                    let slot = &mut witness[j.index() * m + j2.index()];
                    if slot.is_none() {
                        *slot = Some(i);
                    }
                }
            }
        }
        ImprovementDigraph { m, nodes, witness }
    }

    pub fn nodes(&self) -> &[Plant] {
        &self.nodes
    }

    pub fn witness(&self, from: Plant, to: Plant) -> Option<Customer> {
        self.witness[from.index() * self.m + to.index()]
    }

    pub fn has_arc(&self, from: Plant, to: Plant) -> bool {
        self.witness(from, to).is_some()
    }

    /// Arcs as `(from, to, witness)` in lexicographic order.
    pub fn arcs(&self) -> Vec<(Plant, Plant, Customer)> {
        let mut out = Vec::new();
        for &a in &self.nodes {
            for &b in &self.nodes {
                if let Some(w) = self.witness(a, b) {
                    out.push((a, b, w));
                }
            }
        }
        out
    }

    /// A shortest simple cycle through at least three plants, rotated to
    /// start at its smallest plant. Ties go to the first cycle found when
    /// scanning start nodes and first arcs in ascending order.
    pub fn shortest_long_cycle(&self) -> Option<Vec<Plant>> {
        let mut best: Option<Vec<Plant>> = None;
        for &s in &self.nodes {
            for &a in &self.nodes {
                if a == s || !self.has_arc(s, a) {
                    continue;
                }
                // Breadth-first search from `a` avoiding `s`; closing arc t -> s with t != a.
                let mut parent: Vec<Option<Plant>> = vec![None; self.m];
                let mut dist: Vec<Option<usize>> = vec![None; self.m];
                dist[a.index()] = Some(0);
                let mut queue = VecDeque::from([a]);
                while let Some(t) = queue.pop_front() {
                    let d = dist[t.index()].unwrap();
                    let len = d + 2;
                    if best.as_ref().is_some_and(|b| len >= b.len()) {
                        break;
                    }
                    if t != a && self.has_arc(t, s) {
                        let mut path = vec![t];
                        let mut cur = t;
                        while let Some(p) = parent[cur.index()] {
                            path.push(p);
                            cur = p;
                        }
                        path.push(s);
                        path.reverse();
                        best = Some(path);
                        break;
                    }
                    for &nb in &self.nodes {
                        if nb != s && dist[nb.index()].is_none() && self.has_arc(t, nb) {
                            dist[nb.index()] = Some(d + 1);
                            parent[nb.index()] = Some(t);
                            queue.push_back(nb);
                        }
                    }
                }
            }
        }
        best.map(|mut cycle| {
            let start = (0..cycle.len()).min_by_key(|&k| cycle[k]).unwrap();
            cycle.rotate_left(start);
            cycle
        })
    }
}
