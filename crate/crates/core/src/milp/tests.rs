use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::generator::{generate, GenParams};
use crate::model::{Allocation, Instance, InstanceData, Location, Mode};
use crate::oracles::{serial_dictatorship, Permutation};

fn count_prefix(model: &MilpModel, prefix: &str) -> usize {
    model
        .variables()
        .iter()
        .filter(|v| v.name.starts_with(prefix))
        .count()
}

fn count_rows(model: &MilpModel, prefix: &str) -> usize {
    model
        .constraints()
        .iter()
        .filter(|c| c.name.starts_with(prefix))
        .count()
}

fn cha_instance(capacity: Vec<u32>, pref: Vec<Vec<usize>>) -> Instance {
    let n = pref.len();
    let m = capacity.len();
    Instance::from_data(InstanceData {
        mode: Mode::Cha,
        open_cost: vec![0; m],
        assign_cost: vec![vec![0; m]; n],
        capacity,
        pref,
    })
    .unwrap()
}

fn random_instance(n: usize, m: usize, seed: u64) -> Instance {
    let cap = (n as u32).div_ceil(m as u32).max(1) + (seed % 2) as u32;
    generate(&GenParams::new(n, m, cap, seed)).unwrap()
}

#[test]
fn cs_counts_on_table2() {
    let m = build_cs(&fixtures::table2(), &BuildOptions::default()).unwrap();
    assert_eq!(m.num_vars(), 36);
    assert_eq!(count_prefix(&m, "x_"), 32);
    assert_eq!(count_prefix(&m, "y_"), 4);
    assert_eq!(m.num_constraints(), 76);
    assert_eq!(count_rows(&m, "assign_"), 8);
    assert_eq!(count_rows(&m, "cap_"), 4);
    assert_eq!(count_rows(&m, "link_"), 32);
    assert_eq!(count_rows(&m, "stab_"), 32);
}

#[test]
fn cs_without_vi_drops_link_rows() {
    let opts = BuildOptions {
        include_vi: false,
        ..BuildOptions::default()
    };
    let m = build_cs(&fixtures::table2(), &opts).unwrap();
    assert_eq!(m.num_constraints(), 44);
    assert_eq!(count_rows(&m, "link_"), 0);
}

#[test]
fn pw_has_one_row_per_preferred_pair() {
    let m = build_pw(&fixtures::table2(), &BuildOptions::default()).unwrap();
    assert_eq!(count_rows(&m, "pair_"), 48);
}

#[test]
fn reduced_models_indicator_counts() {
    let inst = fixtures::table2();
    let cs_r = build_cs_r(&inst, &BuildOptions::default()).unwrap();
    assert_eq!(count_prefix(&cs_r, "u_"), 4);
    let pw_r = build_pw_r(&inst, &BuildOptions::default()).unwrap();
    assert_eq!(count_prefix(&pw_r, "v_"), 12);
    let cc_r = build_cc_r(&inst, &BuildOptions::default()).unwrap();
    assert_eq!(count_prefix(&cc_r, "ur_"), 16);
    let cc = build_cc(&inst, &BuildOptions::default()).unwrap();
    assert_eq!(count_prefix(&cc, "xr_"), 256);
    assert_eq!(count_prefix(&cc, "ur_"), 32);
}

#[test]
fn relaxation_flags() {
    let inst = fixtures::table2();
    let m = build_cs(&inst, &BuildOptions::relax_x()).unwrap();
    for v in m.variables() {
        assert_eq!(v.integer, v.name.starts_with("y_"), "{}", v.name);
    }
    let m = build_cs_r(&inst, &BuildOptions::relax_all()).unwrap();
    assert!(m.variables().iter().all(|v| !v.integer));
    let m = build_cs_r(&inst, &BuildOptions::default()).unwrap();
    assert!(m.variables().iter().all(|v| v.is_binary()));
}

#[test]
fn wrong_mode_is_rejected() {
    let cha = cha_instance(vec![1, 1], vec![vec![1], vec![2, 1]]);
    for f in [
        Formulation::Cs,
        Formulation::CsR,
        Formulation::Pw,
        Formulation::PwR,
        Formulation::Cc,
        Formulation::CcR,
    ] {
        assert!(
            matches!(build(f, &cha, &BuildOptions::default()), Err(MilpError::WrongMode { .. })),
            "{f}"
        );
    }
    assert!(matches!(
        build_cha_po(&fixtures::table2(), &BuildOptions::default()),
        Err(MilpError::WrongMode { .. })
    ));
    let loc = Location::all_open(2);
    assert!(matches!(
        build_second_level(&cha, &loc, None, &BuildOptions::default()),
        Err(MilpError::WrongMode { .. })
    ));
}

#[test]
fn formulation_names_round_trip() {
    for f in Formulation::STABLE {
        assert_eq!(Formulation::parse(f.name()), Some(f));
        assert_eq!(f.to_string(), f.name());
    }
    assert_eq!(Formulation::parse("CS_R"), Some(Formulation::CsR));
    assert_eq!(Formulation::parse("second-level"), None);
    assert_eq!(Formulation::parse("bogus"), None);
}

#[test]
fn cha_po_only_has_ranked_pairs() {
    let inst = cha_instance(vec![1, 2, 1], vec![vec![1, 3], vec![2], vec![3, 2, 1]]);
    let m = build_cha_po(&inst, &BuildOptions::default()).unwrap();
    assert_eq!(count_prefix(&m, "x_"), 6);
    assert_eq!(count_prefix(&m, "ur_"), 9);
    assert_eq!(m.sense(), Sense::Maximize);
    assert!(m.variables().iter().filter(|v| v.name.starts_with("x_")).all(|v| !v.integer));
    assert!(m.var_index("x_2_1").is_none());
    m.check_well_formed().unwrap();
}

#[test]
fn second_level_structure() {
    let inst = fixtures::table1b();
    let loc = Location::from_numbers(4, &[1, 2]).unwrap();
    let m = build_second_level(&inst, &loc, None, &BuildOptions::default()).unwrap();
    assert_eq!(count_prefix(&m, "x_"), 8);
    assert!(m.var_index("x_1_3").is_none());
    assert_eq!(count_rows(&m, "pref_level"), 0);
    let obj: i64 = m.variables().iter().map(|v| v.objective).sum();
    // Σ over customers of the ranks of plants 1 and 2.
    assert_eq!(obj, 3 + 3 + 6 + 5);
    let m = build_second_level(&inst, &loc, Some(7), &BuildOptions::default()).unwrap();
    assert_eq!(count_rows(&m, "pref_level"), 1);
    let narrow = Location::from_numbers(4, &[1]).unwrap();
    assert_eq!(
        build_second_level(&inst, &narrow, None, &BuildOptions::default()).unwrap_err(),
        MilpError::InfeasibleLocation {
            capacity: 2,
            customers: 4
        }
    );
}

#[test]
fn model_api_rejects_bad_input() {
    let mut m = MilpModel::new("t", Sense::Minimize);
    let a = m.add_var("a", Some(0), Some(1), true, 1, BranchClass::Other).unwrap();
    assert_eq!(
        m.add_var("a", Some(0), Some(1), true, 1, BranchClass::Other),
        Err(MilpError::DuplicateName("a".into()))
    );
    assert_eq!(
        m.add_var("b", Some(2), Some(1), true, 1, BranchClass::Other),
        Err(MilpError::BadBounds("b".into()))
    );
    assert!(matches!(
        m.add_constraint("r", vec![(5, 1)], Relation::Le, 1),
        Err(MilpError::UnknownVariable(_))
    ));
    m.add_constraint("r", vec![(a, 2), (a, -1), (a, 0)], Relation::Le, 1)
        .unwrap();
    assert_eq!(m.constraints()[0].terms, vec![(a, 1)]);
    m.add_constraint("z", vec![(a, 1), (a, -1)], Relation::Le, 0).unwrap();
    assert!(m.constraints()[1].terms.is_empty());
    assert_eq!(m.max_violation(&[2.0]).0, 1.0);
    assert_eq!(m.max_fractionality(&[0.25]), 0.25);
    let fixed = m.with_fixed(&[(a, 1)]);
    assert_eq!(fixed.variables()[a].lower, Some(1));
}

#[test]
fn table4_row1_lifts_into_cc_models() {
    let inst = fixtures::table3();
    let loc = Location::all_open(3);
    let alloc = Allocation::from_groups(&inst, &[&[1, 6, 7], &[2, 4, 5], &[3, 8]]).unwrap();
    let perm = Permutation::from_numbers(&[1, 2, 3, 4, 6, 7, 5, 8]).unwrap();
    for f in [Formulation::Cc, Formulation::CcR] {
        let model = build(f, &inst, &BuildOptions::default()).unwrap();
        let values = lift_allocation(&model, &loc, &alloc, perm.order()).unwrap();
        let (viol, row) = model.max_violation(&values);
        assert_eq!(viol, 0.0, "{f}: {row:?}");
        let (l2, a2) = decode(&model, &values).unwrap();
        assert_eq!((l2, a2), (loc.clone(), alloc.clone()));
    }
}

#[test]
fn decode_rejects_fractional_values() {
    let inst = fixtures::table2();
    let model = build_cs(&inst, &BuildOptions::relax_x()).unwrap();
    let mut values = vec![0.0; model.num_vars()];
    values[0] = 0.5;
    assert!(matches!(decode(&model, &values), Err(MilpError::Fractional(_))));
}

/// Lifting a serial-dictatorship allocation satisfies every row of every
/// stable formulation, and decoding recovers it.
fn check_sd_lift(inst: &Instance, open: &[bool], perm: &[usize]) {
    let loc = Location::new(open.to_vec());
    if loc.open_capacity(inst) < inst.n_customers() as u64 {
        return;
    }
    let perm = Permutation::from_numbers(perm).unwrap();
    let alloc = serial_dictatorship(inst, &loc, &perm).unwrap();
    for f in [
        Formulation::Cs,
        Formulation::CsR,
        Formulation::Pw,
        Formulation::PwR,
        Formulation::Cc,
        Formulation::CcR,
    ] {
        let model = build(f, inst, &BuildOptions::default()).unwrap();
        model.check_well_formed().unwrap();
        let values = lift_allocation(&model, &loc, &alloc, perm.order()).unwrap();
        let (viol, row) = model.max_violation(&values);
        assert_eq!(viol, 0.0, "{f} violates {row:?}");
        let (l2, a2) = decode(&model, &values).unwrap();
        assert_eq!(a2, alloc, "{f}");
        assert_eq!(l2, loc, "{f}");
    }
}

#[test]
fn sd_lift_is_feasible_on_fixtures() {
    let inst = fixtures::table2();
    check_sd_lift(&inst, &[true, true, true, false], &[1, 2, 3, 4, 5, 6, 7, 8]);
    check_sd_lift(&inst, &[true; 4], &[8, 7, 6, 5, 4, 3, 2, 1]);
    let inst = fixtures::table3();
    check_sd_lift(&inst, &[true; 3], &[5, 2, 6, 7, 1, 3, 4, 8]);
}

#[test]
fn cha_sd_lift_is_feasible() {
    let inst = cha_instance(vec![1, 2, 1], vec![vec![1, 3], vec![1], vec![3, 2, 1], vec![1]]);
    let model = build_cha_po(&inst, &BuildOptions::default()).unwrap();
    let perm = Permutation::from_numbers(&[2, 1, 4, 3]).unwrap();
    let values = lift_serial_dictatorship(&model, &Location::all_open(3), &perm).unwrap();
    assert_eq!(model.max_violation(&values).0, 0.0);
    let (_, alloc) = decode(&model, &values).unwrap();
    assert_eq!(alloc.n_assigned(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sd_lift_is_feasible_on_random_instances(
        seed in any::<u64>(),
        n in 1usize..7,
        m in 1usize..4,
        mask in any::<u8>(),
        perm_seed in any::<u64>(),
    ) {
        let inst = random_instance(n, m, seed);
        let open: Vec<bool> = (0..m).map(|j| mask >> j & 1 == 1).collect();
        let mut perm: Vec<usize> = (1..=n).collect();
        crate::generator::SplitMix64::new(perm_seed).shuffle(&mut perm);
        check_sd_lift(&inst, &open, &perm);
    }

    #[test]
    fn builders_are_well_formed(seed in any::<u64>(), n in 1usize..7, m in 1usize..5) {
        let inst = random_instance(n, m, seed);
        for f in Formulation::STABLE.into_iter().filter(|f| *f != Formulation::ChaPo) {
            for opts in [BuildOptions::default(), BuildOptions::relax_x(), BuildOptions::relax_all()] {
                let model = build(f, &inst, &opts).unwrap();
                model.check_well_formed().unwrap();
                for v in model.variables() {
                    if v.is_binary() || !v.integer {
                        prop_assert_eq!((v.lower, v.upper), (Some(0), Some(1)));
                    }
                }
            }
        }
    }
}
