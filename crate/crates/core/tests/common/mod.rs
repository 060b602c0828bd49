//! Random inputs and exhaustive oracles shared by the integration suites and
//! the acceptance runner.
#![allow(dead_code)]

use std::ops::ControlFlow;

use cflcp_core::milp::{BranchClass, MilpModel, Relation, Sense};
use cflcp_core::model::{Allocation, Instance, InstanceData, Location, Mode};
use cflcp_core::oracles::{for_each_feasible_allocation, Permutation};
use num::{BigInt, BigRational, One, Signed, Zero};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

/// A cflcp instance with up to `max_n` customers and `max_m` plants whose
/// plants, all open, can hold everyone. Capacities differ per plant.
pub fn random_cflcp(rng: &mut StdRng, max_n: usize, max_m: usize) -> Instance {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    sized_cflcp(rng, n, m)
}

pub fn sized_cflcp(rng: &mut StdRng, n: usize, m: usize) -> Instance {
    let mut capacity: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=n as u32)).collect();
    let total: u32 = capacity.iter().sum();
    if (total as usize) < n {
        capacity[m - 1] += n as u32 - total;
    }
    let pref = (0..n)
        .map(|_| {
            let mut list: Vec<usize> = (1..=m).collect();
            list.shuffle(rng);
            list
        })
        .collect();
    Instance::from_data(InstanceData {
        mode: Mode::Cflcp,
        open_cost: (0..m).map(|_| rng.gen_range(0..=40)).collect(),
        assign_cost: (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..=15)).collect()).collect(),
        capacity,
        pref,
    })
    .unwrap()
}

/// A house allocation instance with partial, non-empty preference lists.
pub fn random_cha(rng: &mut StdRng, max_n: usize, max_m: usize) -> Instance {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let pref = (0..n)
        .map(|_| {
            let mut list: Vec<usize> = (1..=m).collect();
            list.shuffle(rng);
            list.truncate(rng.gen_range(1..=m));
            list
        })
        .collect();
    Instance::from_data(InstanceData {
        mode: Mode::Cha,
        open_cost: vec![0; m],
        assign_cost: vec![vec![0; m]; n],
        capacity: (0..m).map(|_| rng.gen_range(1..=2)).collect(),
        pref,
    })
    .unwrap()
}

/// A random subset of plants with room for every customer.
pub fn random_open(rng: &mut StdRng, inst: &Instance) -> Location {
    let m = inst.n_plants();
    loop {
        let loc = Location::new((0..m).map(|_| rng.gen_bool(0.6)).collect());
        if loc.open_capacity(inst) >= inst.n_customers() as u64 {
            return loc;
        }
    }
}

pub fn random_permutation(rng: &mut StdRng, n: usize) -> Permutation {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    Permutation::from_numbers(&order).unwrap()
}

pub fn feasible_allocations(inst: &Instance, loc: &Location) -> Vec<Allocation> {
    let mut out = Vec::new();
    for_each_feasible_allocation(inst, loc, |assigned, _| {
        out.push(Allocation::from_assignments(inst, assigned.to_vec()).unwrap());
        ControlFlow::Continue(())
    });
    out
}

/// Every location with room for all customers.
pub fn feasible_locations(inst: &Instance) -> Vec<Location> {
    let m = inst.n_plants();
    (1u32..1 << m)
        .map(|mask| Location::new((0..m).map(|j| mask >> j & 1 == 1).collect()))
        .filter(|loc| loc.open_capacity(inst) >= inst.n_customers() as u64)
        .collect()
}

fn strictly_prefers(inst: &Instance, i: usize, to: usize, from: usize) -> bool {
    let pref = inst.pref(cflcp_core::Customer(i));
    let pos = |j: usize| pref.iter().position(|p| p.index() == j);
    match (pos(to), pos(from)) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Whether some set of at least two assigned customers can redistribute
/// their own plants (repeats allowed) so that each strictly improves.
pub fn exhaustive_blocking_set(inst: &Instance, alloc: &Allocation) -> bool {
    let assigned: Vec<(usize, usize)> = alloc.pairs().map(|(i, j)| (i.index(), j.index())).collect();
    let k = assigned.len();
    for mask in 1u32..1 << k {
        if mask.count_ones() < 2 {
            continue;
        }
        let members: Vec<(usize, usize)> =
            (0..k).filter(|t| mask >> t & 1 == 1).map(|t| assigned[t]).collect();
        let mut used = vec![false; members.len()];
        if bijection(inst, &members, 0, &mut used) {
            return true;
        }
    }
    false
}

fn bijection(inst: &Instance, members: &[(usize, usize)], at: usize, used: &mut [bool]) -> bool {
    if at == members.len() {
        return true;
    }
    let (i, own) = members[at];
    for s in 0..members.len() {
        let plant = members[s].1;
        if !used[s] && strictly_prefers(inst, i, plant, own) {
            used[s] = true;
            if bijection(inst, members, at + 1, used) {
                return true;
            }
            used[s] = false;
        }
    }
    false
}

/// Whether at least three customers at pairwise distinct plants improve
/// when each moves to the plant of the next in some cyclic order.
pub fn exhaustive_rotation(inst: &Instance, alloc: &Allocation) -> bool {
    let assigned: Vec<(usize, usize)> = alloc.pairs().map(|(i, j)| (i.index(), j.index())).collect();
    let k = assigned.len();
    for mask in 1u32..1 << k {
        if mask.count_ones() < 3 {
            continue;
        }
        let members: Vec<(usize, usize)> =
            (0..k).filter(|t| mask >> t & 1 == 1).map(|t| assigned[t]).collect();
        let mut plants: Vec<usize> = members.iter().map(|m| m.1).collect();
        plants.sort();
        plants.dedup();
        if plants.len() != members.len() {
            continue;
        }
        // Fix the first member and try every order of the rest.
        let mut rest: Vec<usize> = (1..members.len()).collect();
        if permutations_any(&mut rest, 0, &mut |order| {
            let cycle: Vec<(usize, usize)> = std::iter::once(members[0])
                .chain(order.iter().map(|&t| members[t]))
                .collect();
            (0..cycle.len()).all(|t| {
                let (i, own) = cycle[t];
                strictly_prefers(inst, i, cycle[(t + 1) % cycle.len()].1, own)
            })
        }) {
            return true;
        }
    }
    false
}

fn permutations_any(items: &mut Vec<usize>, at: usize, test: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if at == items.len() {
        return test(items);
    }
    for s in at..items.len() {
        items.swap(at, s);
        let hit = permutations_any(items, at + 1, test);
        items.swap(at, s);
        if hit {
            return true;
        }
    }
    false
}

/// Largest number of matched applicants over Pareto optimal matchings,
/// found by pairwise domination over every feasible matching.
pub fn pareto_max_cardinality(inst: &Instance) -> usize {
    let m = inst.n_plants();
    let loc = Location::all_open(m);
    let mut ranks: Vec<Vec<u32>> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for_each_feasible_allocation(inst, &loc, |assigned, _| {
        let r = assigned
            .iter()
            .enumerate()
            .map(|(i, j)| match j {
                Some(j) => inst.rank(cflcp_core::Customer(i), *j).unwrap(),
                None => m as u32 + 1,
            })
            .collect();
        ranks.push(r);
        sizes.push(assigned.iter().filter(|j| j.is_some()).count());
        ControlFlow::Continue(())
    });
    let dominated = |a: &[u32]| {
        ranks.iter().any(|b| b.iter().zip(a).all(|(x, y)| x <= y) && b.iter().zip(a).any(|(x, y)| x < y))
    };
    (0..ranks.len())
        .filter(|&k| !dominated(&ranks[k]))
        .map(|k| sizes[k])
        .max()
        .unwrap_or(0)
}

/// Largest distance of an assignment-class variable from an integer.
pub fn x_fractionality(model: &MilpModel, values: &[f64]) -> f64 {
    model
        .variables()
        .iter()
        .zip(values)
        .filter(|(v, _)| v.class == BranchClass::Assignment)
        .map(|(_, x)| (x - x.round()).abs())
        .fold(0.0, f64::max)
}

/// Optimum of the linear relaxation of `model` in exact rational arithmetic,
/// by a dense two-phase tableau simplex with Bland's rule. Every variable
/// needs a finite lower bound; finite upper bounds become rows. `None` when
/// infeasible.
pub fn exact_lp(model: &MilpModel) -> Option<BigRational> {
    let q = |v: i64| BigRational::from_integer(BigInt::from(v));
    let n = model.num_vars();
    // Shift x = lower + x' so every structural column is nonnegative.
    let lower: Vec<i64> = model.variables().iter().map(|v| v.lower.expect("finite lower bound")).collect();
    let mut rows: Vec<(Vec<BigRational>, Relation, BigRational)> = Vec::new();
    for c in model.constraints() {
        let mut a = vec![BigRational::zero(); n];
        let mut rhs = q(c.rhs);
        for &(k, coef) in &c.terms {
            a[k] += q(coef);
            rhs -= q(coef * lower[k]);
        }
        rows.push((a, c.relation, rhs));
    }
    for (k, v) in model.variables().iter().enumerate() {
        if let Some(u) = v.upper {
            let mut a = vec![BigRational::zero(); n];
            a[k] = BigRational::one();
            rows.push((a, Relation::Le, q(u - lower[k])));
        }
    }
    // Nonnegative right-hand sides, then slack/surplus and artificials.
    for (a, rel, rhs) in &mut rows {
        if rhs.is_negative() {
            for x in a.iter_mut() {
                *x = -x.clone();
            }
            *rhs = -rhs.clone();
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + n_slack + n_art;
    let mut t: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); cols + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut s, mut art) = (n, n + n_slack);
    for (r, (a, rel, rhs)) in rows.into_iter().enumerate() {
        t[r][..n].clone_from_slice(&a);
        t[r][cols] = rhs;
        match rel {
            Relation::Le => {
                t[r][s] = BigRational::one();
                basis[r] = s;
                s += 1;
            }
            Relation::Ge => {
                t[r][s] = -BigRational::one();
                s += 1;
                t[r][art] = BigRational::one();
                basis[r] = art;
                art += 1;
            }
            Relation::Eq => {
                t[r][art] = BigRational::one();
                basis[r] = art;
                art += 1;
            }
        }
    }
    let first_art = n + n_slack;
    // Phase one minimizes the artificial sum.
    let mut cost = vec![BigRational::zero(); cols];
    for c in cost.iter_mut().skip(first_art) {
        *c = BigRational::one();
    }
    tableau_min(&mut t, &mut basis, &cost, cols, cols);
    let infeasibility: BigRational = (0..m)
        .filter(|&r| basis[r] >= first_art)
        .map(|r| t[r][cols].clone())
        .sum();
    if infeasibility.is_positive() {
        return None;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for r in 0..m {
        if basis[r] >= first_art {
            if let Some(c) = (0..first_art).find(|&c| !t[r][c].is_zero()) {
                pivot(&mut t, &mut basis, r, c, cols);
            }
        }
    }
    let sign = if model.sense() == Sense::Maximize { -1 } else { 1 };
    let mut cost = vec![BigRational::zero(); cols];
    let mut shift = BigRational::zero();
    for (k, v) in model.variables().iter().enumerate() {
        cost[k] = q(sign * v.objective);
        shift += q(v.objective * lower[k]);
    }
    let unbounded = !tableau_min(&mut t, &mut basis, &cost, first_art, cols);
    assert!(!unbounded, "exact oracle expects bounded problems");
    let mut value = shift;
    for r in 0..m {
        if basis[r] < n {
            value += q(model.variables()[basis[r]].objective) * t[r][cols].clone();
        }
    }
    Some(value)
}

fn pivot(t: &mut [Vec<BigRational>], basis: &mut [usize], r: usize, c: usize, cols: usize) {
    let p = t[r][c].clone();
    for x in t[r].iter_mut() {
        *x /= p.clone();
    }
    let pivot_row = t[r].clone();
    for (rr, row) in t.iter_mut().enumerate() {
        if rr == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for k in 0..=cols {
            if !pivot_row[k].is_zero() {
                row[k] -= f.clone() * pivot_row[k].clone();
            }
        }
    }
    basis[r] = c;
}

/// Bland's rule over columns `< allowed`; false when unbounded.
fn tableau_min(
    t: &mut [Vec<BigRational>],
    basis: &mut [usize],
    cost: &[BigRational],
    allowed: usize,
    cols: usize,
) -> bool {
    loop {
        let entering = (0..allowed).find(|&c| {
            if basis.contains(&c) {
                return false;
            }
            let mut d = cost[c].clone();
            for (r, row) in t.iter().enumerate() {
                if !row[c].is_zero() {
                    d -= cost[basis[r]].clone() * row[c].clone();
                }
            }
            d.is_negative()
        });
        let Some(c) = entering else { return true };
        let mut best: Option<(BigRational, usize, usize)> = None;
        for (r, row) in t.iter().enumerate() {
            if row[c].is_positive() {
                let ratio = row[cols].clone() / row[c].clone();
                let better = match &best {
                    None => true,
                    Some((b, _, var)) => ratio < *b || (ratio == *b && basis[r] < *var),
                };
                if better {
                    best = Some((ratio, r, basis[r]));
                }
            }
        }
        let Some((_, r, _)) = best else { return false };
        pivot(t, basis, r, c, cols);
    }
}
