use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::model::{InstanceData, Mode};

fn p(k: usize) -> Plant {
    Plant::from_number(k).unwrap()
}

fn c(k: usize) -> Customer {
    Customer::from_number(k).unwrap()
}

/// Every (customer, open undersubscribed strictly better plant), keeping the
/// best-ranked plant per customer.
fn blocking_customers_oracle(inst: &Instance, loc: &Location, alloc: &Allocation) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in inst.customers() {
        let mut best: Option<(u32, Plant)> = None;
        for j in inst.plants() {
            let better = match alloc.plant_of(i) {
                Some(cur) => match (inst.rank(i, j), inst.rank(i, cur)) {
                    (Some(a), Some(b)) => a < b,
                    _ => false,
                },
                None => inst.rank(i, j).is_some(),
            };
            if better && loc.is_open(j) && alloc.occupancy(j) < inst.capacity(j) {
                let r = inst.rank(i, j).unwrap();
                if best.map_or(true, |(br, _)| r < br) {
                    best = Some((r, j));
                }
            }
        }
        if let Some((_, j)) = best {
            out.push((i.number(), j.number()));
        }
    }
    out
}

#[test]
fn blocking_customers_on_table3() {
    let t3 = fixtures::table3();
    let loc = Location::all_open(3);
    let alloc = Allocation::from_groups(&t3, &[&[6, 7], &[1, 2, 4], &[3, 5, 8]]).unwrap();
    let expected = blocking_customers_oracle(&t3, &loc, &alloc);
    // Customer 8 sits at plant 3, ranks plant 1 first, and plant 1 has room.
    assert_eq!(expected, vec![(1, 1), (5, 1), (8, 1)]);
    let found: Vec<(usize, usize)> = find_blocking_customers(&t3, &loc, &alloc)
        .unwrap()
        .iter()
        .map(|b| (b.customer.number(), b.better_plant.number()))
        .collect();
    assert_eq!(found, expected);
}

#[test]
fn no_blocking_customers_at_top_choices_or_table4_row1() {
    let t3 = fixtures::table3();
    let loc = Location::all_open(3);
    let row1 = Allocation::from_groups(&t3, &[&[1, 6, 7], &[2, 4, 5], &[3, 8]]).unwrap();
    assert!(find_blocking_customers(&t3, &loc, &row1).unwrap().is_empty());

    let rot = fixtures::rotation3();
    let top = Allocation::from_numbers(&rot, &[Some(2), Some(3), Some(1)]).unwrap();
    let loc3 = Location::all_open(3);
    assert!(find_blocking_customers(&rot, &loc3, &top).unwrap().is_empty());
    assert!(find_blocking_pairs(&rot, &top).is_empty());
    assert!(build_improvement_digraph(&rot, &top).arcs().is_empty());
}

#[test]
fn closed_plant_is_rejected() {
    let t3 = fixtures::table3();
    let loc = Location::from_numbers(3, &[1, 2]).unwrap();
    let alloc = Allocation::from_groups(&t3, &[&[1, 6, 7], &[2, 4, 5], &[3, 8]]).unwrap();
    assert_eq!(
        classify(&t3, &loc, &alloc),
        Err(StabilityError::ClosedPlantUsed {
            customer: c(3),
            plant: p(3)
        })
    );
}

#[test]
fn example_swap_has_single_blocking_pair() {
    let t3 = fixtures::table3();
    let alloc = Allocation::from_groups(&t3, &[&[1, 5, 6], &[2, 4, 7], &[3, 8]]).unwrap();
    let pairs = find_blocking_pairs(&t3, &alloc);
    assert_eq!(
        pairs,
        vec![BlockingPair {
            customers: (c(5), c(7)),
            plants: (p(1), p(2))
        }]
    );
    let report = classify(&t3, &Location::all_open(3), &alloc).unwrap();
    assert_eq!(report.class, StabilityClass::CustomerStableOnly);
    assert!(report.blocking_customers.is_empty());

    let swapped = pairs[0].apply(&t3, &alloc).unwrap();
    assert_eq!(swapped.groups_string(3), "{1,6,7}/{2,4,5}/{3,8}");
}

#[test]
fn improvement_digraph_arcs() {
    let t3 = fixtures::table3();
    let alloc = Allocation::from_groups(&t3, &[&[1, 5, 6], &[2, 4, 7], &[3, 8]]).unwrap();
    let g = build_improvement_digraph(&t3, &alloc);
    assert_eq!(g.witness(p(1), p(2)), Some(c(5)));
    assert_eq!(g.witness(p(2), p(1)), Some(c(7)));

    // Exhaustive arc construction for the rotation instance.
    let rot = fixtures::rotation3();
    let ident = Allocation::from_numbers(&rot, &[Some(1), Some(2), Some(3)]).unwrap();
    let mut expected = Vec::new();
    for i in rot.customers() {
        let j = ident.plant_of(i).unwrap();
        for j2 in rot.plants() {
            if rot.prefers_unchecked(i, j2, j) && ident.occupancy(j2) > 0 {
                expected.push((j.number(), j2.number()));
            }
        }
    }
    expected.sort();
    assert_eq!(expected, vec![(1, 2), (2, 3), (3, 1)]);
    let arcs: Vec<(usize, usize)> = build_improvement_digraph(&rot, &ident)
        .arcs()
        .iter()
        .map(|(a, b, _)| (a.number(), b.number()))
        .collect();
    assert_eq!(arcs, expected);
}

#[test]
fn rotation_coalition() {
    let rot = fixtures::rotation3();
    let ident = Allocation::from_numbers(&rot, &[Some(1), Some(2), Some(3)]).unwrap();
    let coal = find_blocking_coalition(&rot, &ident).unwrap();
    assert_eq!(coal.customers, vec![c(1), c(2), c(3)]);
    assert_eq!(coal.plants, vec![p(1), p(2), p(3)]);
    assert_eq!(coal.moves_to, vec![p(2), p(3), p(1)]);
    let report = classify(&rot, &Location::all_open(3), &ident).unwrap();
    assert_eq!(report.class, StabilityClass::PairwiseStableOnly);
    let rotated = coal.apply(&rot, &ident).unwrap();
    assert_eq!(
        classify(&rot, &Location::all_open(3), &rotated).unwrap().class,
        StabilityClass::CyclicCoalitionStable
    );
}

#[test]
fn classify_examples() {
    let t3 = fixtures::table3();
    let row1 = Allocation::from_groups(&t3, &[&[1, 6, 7], &[2, 4, 5], &[3, 8]]).unwrap();
    let r = classify(&t3, &Location::all_open(3), &row1).unwrap();
    assert_eq!(r.class, StabilityClass::CyclicCoalitionStable);
    assert!(r.blocking_coalition.is_none());

    let t1b = fixtures::table1b();
    let loc = Location::from_numbers(4, &[1, 2]).unwrap();
    let a = Allocation::from_groups(&t1b, &[&[1, 2], &[3, 4]]).unwrap();
    assert_eq!(
        classify(&t1b, &loc, &a).unwrap().class,
        StabilityClass::CyclicCoalitionStable
    );
}

#[test]
fn report_serializes_with_contract_field_names() {
    let t3 = fixtures::table3();
    let alloc = Allocation::from_groups(&t3, &[&[1, 5, 6], &[2, 4, 7], &[3, 8]]).unwrap();
    let r = classify(&t3, &Location::all_open(3), &alloc).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["class"], "customer-stable-only");
    assert_eq!(v["blocking_pairs"][0]["customers"], serde_json::json!([5, 7]));
    assert_eq!(v["blocking_pairs"][0]["plants"], serde_json::json!([1, 2]));
    assert!(v["blocking_coalition"].is_null());
    assert_eq!(v["blocking_customers"], serde_json::json!([]));
}

#[test]
fn unassigned_cha_customer_can_block() {
    let inst = Instance::from_data(InstanceData {
        mode: Mode::Cha,
        open_cost: vec![0, 0],
        assign_cost: vec![vec![0, 0]; 2],
        capacity: vec![1, 1],
        pref: vec![vec![1], vec![2, 1]],
    })
    .unwrap();
    let a = Allocation::from_numbers(&inst, &[Some(1), None]).unwrap();
    let b = find_blocking_customers(&inst, &Location::all_open(2), &a).unwrap();
    assert_eq!(
        b,
        vec![BlockingCustomer {
            customer: c(2),
            current_plant: None,
            better_plant: p(2)
        }]
    );
}

#[test]
fn class_satisfies_is_nested() {
    use StabilityClass::*;
    assert!(CyclicCoalitionStable.satisfies(StabilityLevel::CyclicCoalition));
    assert!(PairwiseStableOnly.satisfies(StabilityLevel::Pairwise));
    assert!(!PairwiseStableOnly.satisfies(StabilityLevel::CyclicCoalition));
    assert!(CustomerStableOnly.satisfies(StabilityLevel::Customer));
    assert!(!NotCustomerStable.satisfies(StabilityLevel::Customer));
}

/// A random complete instance with a random feasible allocation.
fn arb_case() -> impl Strategy<Value = (Instance, Allocation)> {
    (2usize..=9, 2usize..=5).prop_flat_map(|(n, m)| {
        let cap_hi = n as u32;
        (
            proptest::collection::vec(Just((1..=m).collect::<Vec<_>>()).prop_shuffle(), n),
            proptest::collection::vec(1u32..=cap_hi, m),
            proptest::collection::vec(0usize..m, n),
        )
            .prop_filter_map("capacity too small", move |(pref, mut cap, choice)| {
                let total: u32 = cap.iter().sum();
                if (total as usize) < n {
                    cap[0] += n as u32 - total;
                }
                let inst = Instance::from_data(InstanceData {
                    mode: Mode::Cflcp,
                    open_cost: vec![0; m],
                    assign_cost: vec![vec![0; m]; n],
                    capacity: cap.clone(),
                    pref,
                })
                .ok()?;
                // Place each customer at its chosen plant or the next with room.
                let mut occ = vec![0u32; m];
                let mut assigned = Vec::with_capacity(n);
                for &start in &choice {
                    let j = (0..m).map(|k| (start + k) % m).find(|&j| occ[j] < cap[j])?;
                    occ[j] += 1;
                    assigned.push(Some(Plant(j)));
                }
                let alloc = Allocation::from_assignments(&inst, assigned).ok()?;
                Some((inst, alloc))
            })
    })
}

proptest! {
    #[test]
    fn class_matches_certificates((inst, alloc) in arb_case()) {
        let loc = alloc.used_location();
        let r = classify(&inst, &loc, &alloc).unwrap();
        let expected = if !r.blocking_customers.is_empty() {
            StabilityClass::NotCustomerStable
        } else if !r.blocking_pairs.is_empty() {
            StabilityClass::CustomerStableOnly
        } else if r.blocking_coalition.is_some() {
            StabilityClass::PairwiseStableOnly
        } else {
            StabilityClass::CyclicCoalitionStable
        };
        prop_assert_eq!(r.class, expected);
        let oracle = blocking_customers_oracle(&inst, &loc, &alloc);
        let got: Vec<(usize, usize)> = r.blocking_customers.iter()
            .map(|b| (b.customer.number(), b.better_plant.number())).collect();
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn swaps_strictly_improve_everyone_involved((inst, alloc) in arb_case()) {
        for pair in find_blocking_pairs(&inst, &alloc) {
            let next = pair.apply(&inst, &alloc).unwrap();
            for i in [pair.customers.0, pair.customers.1] {
                prop_assert!(inst.rank(i, next.plant_of(i).unwrap()) < inst.rank(i, alloc.plant_of(i).unwrap()));
            }
        }
        if let Some(coal) = find_blocking_coalition(&inst, &alloc) {
            prop_assert!(coal.customers.len() >= 3);
            let mut plants = coal.plants.clone();
            plants.sort();
            plants.dedup();
            prop_assert_eq!(plants.len(), coal.plants.len());
            let next = coal.apply(&inst, &alloc).unwrap();
            prop_assert_eq!(next.occupancies(), alloc.occupancies());
            for &i in &coal.customers {
                prop_assert!(inst.rank(i, next.plant_of(i).unwrap()) < inst.rank(i, alloc.plant_of(i).unwrap()));
            }
        }
    }
}
