use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::generator::{generate, GenParams};
use crate::milp::{build, build_cs, BranchClass, BuildOptions, Formulation, MilpModel, Relation, Sense};
use crate::solver::{solve_lp, solve_milp, Limits, LpStatus, MilpStatus};

fn lp_text(model: &MilpModel) -> String {
    String::from_utf8(write_lp_file(model).unwrap()).unwrap()
}

type VarKey = (Option<i64>, Option<i64>, bool, i64);
type RowKey = (BTreeMap<String, i64>, Relation, i64);

/// Compares two models by name; the reader orders variables by first use.
fn semantic(m: &MilpModel) -> (Sense, BTreeMap<String, VarKey>, BTreeMap<String, RowKey>) {
    let vars = m
        .variables()
        .iter()
        .map(|v| (v.name.clone(), (v.lower, v.upper, v.integer, v.objective)))
        .collect();
    let rows = m
        .constraints()
        .iter()
        .map(|c| {
            let terms = c.terms.iter().map(|&(k, a)| (m.variables()[k].name.clone(), a)).collect();
            (c.name.clone(), (terms, c.relation, c.rhs))
        })
        .collect();
    (m.sense(), vars, rows)
}

fn section<'a>(text: &'a str, header: &str) -> Vec<&'a str> {
    let mut lines = text.lines().skip_while(|l| *l != header);
    lines.next();
    lines
        .take_while(|l| l.starts_with(' '))
        .flat_map(|l| l.split_whitespace())
        .collect()
}

#[test]
fn cs_table2_declares_all_binaries() {
    let model = build_cs(&fixtures::table2(), &BuildOptions::default()).unwrap();
    let text = lp_text(&model);
    assert!(text.starts_with("\\ Problem: cs\nMinimize\n obj: "));
    assert!(text.ends_with("End\n"));
    let binaries = section(&text, "Binaries");
    assert_eq!(binaries.len(), 36);
    assert!(binaries.contains(&"y_4") && binaries.contains(&"x_8_4"));
    assert!(!text.contains("Generals"));
    assert!(text.lines().all(|l| l.len() <= 100), "long line");
}

#[test]
fn relaxed_x_moves_to_bounds() {
    let model = build_cs(&fixtures::table2(), &BuildOptions::relax_x()).unwrap();
    let text = lp_text(&model);
    assert_eq!(section(&text, "Binaries"), vec!["y_1", "y_2", "y_3", "y_4"]);
    assert!(text.contains(" 0 <= x_1_1 <= 1\n"));
}

#[test]
fn empty_model_has_no_constraint_section() {
    let mut m = MilpModel::new("empty", Sense::Maximize);
    m.add_var("z", Some(0), Some(4), true, 0, BranchClass::Other).unwrap();
    let text = lp_text(&m);
    assert!(!text.contains("Subject To"));
    assert!(text.contains("Maximize\n obj: 0 z\n"));
    assert!(text.contains("Generals\n z\n"));
    let back = read_lp_file(&text).unwrap();
    assert_eq!(back.num_constraints(), 0);
    assert_eq!(back.variables()[0].upper, Some(4));
}

#[test]
fn free_and_unbounded_variables() {
    let mut m = MilpModel::new("bounds", Sense::Minimize);
    let a = m.add_var("a", None, None, false, 1, BranchClass::Other).unwrap();
    let b = m.add_var("b", Some(-3), None, false, -1, BranchClass::Other).unwrap();
    let c = m.add_var("c", None, Some(7), false, 0, BranchClass::Other).unwrap();
    m.add_constraint("r", [(a, 1), (b, 2), (c, -1)], Relation::Ge, -5).unwrap();
    let text = lp_text(&m);
    assert!(text.contains(" a free\n"));
    assert!(text.contains(" b >= -3\n"));
    assert!(text.contains(" -infinity <= c <= 7\n"));
    let back = read_lp_file(&text).unwrap();
    assert_eq!(lp_text(&back), text);
}

#[test]
fn writing_is_deterministic() {
    let model = build(Formulation::Cc, &fixtures::table3(), &BuildOptions::default()).unwrap();
    assert_eq!(write_lp_file(&model).unwrap(), write_lp_file(&model).unwrap());
}

#[test]
fn bad_names_are_rejected() {
    let mut m = MilpModel::new("names", Sense::Minimize);
    m.add_var("x".repeat(MAX_NAME_LEN + 1), Some(0), Some(1), true, 1, BranchClass::Other)
        .unwrap();
    assert!(matches!(write_lp_file(&m), Err(BridgeError::NameTooLong(_))));
    let mut m = MilpModel::new("names", Sense::Minimize);
    m.add_var("a b", Some(0), Some(1), true, 1, BranchClass::Other).unwrap();
    assert!(matches!(write_lp_file(&m), Err(BridgeError::BadName(_))));
    let mut m = MilpModel::new("names", Sense::Minimize);
    m.add_var("1x", Some(0), Some(1), true, 1, BranchClass::Other).unwrap();
    assert!(matches!(write_lp_file(&m), Err(BridgeError::BadName(_))));
    let mut m = MilpModel::new("names", Sense::Minimize);
    m.add_var("e1", Some(0), Some(1), true, 1, BranchClass::Other).unwrap();
    assert!(matches!(write_lp_file(&m), Err(BridgeError::BadName(_))));
    let mut m = MilpModel::new("names", Sense::Minimize);
    let x = m.add_var("x", Some(0), Some(1), true, 1, BranchClass::Other).unwrap();
    m.add_constraint("empty_1", [(x, 1)], Relation::Le, 1).unwrap();
    assert!(write_lp_file(&m).is_ok());
}

#[test]
fn lp_round_trip_preserves_the_optimum() {
    for f in [Formulation::Cs, Formulation::PwR, Formulation::CcR] {
        let model = build(f, &fixtures::table2(), &BuildOptions::default()).unwrap();
        let text = lp_text(&model);
        let back = read_lp_file(&text).unwrap();
        assert!(semantic(&back) == semantic(&model), "{f}");
        assert_eq!(lp_text(&read_lp_file(&lp_text(&back)).unwrap()), lp_text(&back), "{f}");
        let (a, b) = (solve_lp(&model).unwrap(), solve_lp(&back).unwrap());
        assert_eq!(a.status, LpStatus::Optimal);
        assert!((a.objective - b.objective).abs() < 1e-9, "{f}");
    }
}

#[test]
fn read_rejects_malformed_input() {
    assert!(matches!(read_lp_file("Minimize\n obj: 2 x\nSubject To\n c: x + <= 1\nEnd\n"), Err(BridgeError::Parse { .. })));
    assert!(matches!(read_lp_file("Minimize\n obj: 2 x -\nEnd\n"), Err(BridgeError::Parse { .. })));
    assert!(matches!(read_lp_file("Minimize\n obj: 2 x\nSubject To\n c: x + 3 <= 1\nEnd\n"), Err(BridgeError::Parse { .. })));
    assert!(matches!(read_lp_file("Subject To\n c: x <= 1\nEnd\n"), Err(BridgeError::Parse { .. })));
}

#[test]
fn solution_file_round_trip() {
    let inst = fixtures::table2();
    let model = build_cs(&inst, &BuildOptions::default()).unwrap();
    let sol = solve_milp(&model, &Limits::default()).unwrap();
    let values = sol.values.unwrap();
    let text = write_solution_file(&model, MilpStatus::Optimal, Some(&values));
    assert!(text.starts_with("# status optimal\n# objective 19\n"));
    let back = read_solution_file(&text, &model).unwrap();
    assert_eq!(back.status, MilpStatus::Optimal);
    assert_eq!(back.objective, Some(19.0));
    assert_eq!(back.values.as_deref(), Some(&values[..]));
}

#[test]
fn solution_with_wrong_header_objective_is_recomputed() {
    let model = build_cs(&fixtures::table2(), &BuildOptions::default()).unwrap();
    let values = solve_milp(&model, &Limits::default()).unwrap().values.unwrap();
    let text = write_solution_file(&model, MilpStatus::Optimal, Some(&values))
        .replace("# objective 19", "# objective 25");
    let back = read_solution_file(&text, &model).unwrap();
    assert_eq!(back.objective, Some(19.0));
}

#[test]
fn solution_violation_names_the_row() {
    // Four customers on plant 1 exceed its capacity of 3.
    let model = build_cs(&fixtures::table2(), &BuildOptions::default()).unwrap();
    let mut text = String::from("# status optimal\ny_1 1\n");
    for i in 1..=8 {
        let j = if i <= 4 { 1 } else { 2 };
        text.push_str(&format!("x_{i}_{j} 1\n"));
    }
    text.push_str("y_2 1\n");
    match read_solution_file(&text, &model) {
        Err(BridgeError::Verification { name, violation }) => {
            assert!(name.starts_with("cap_1") || name.starts_with("stab_"), "{name}");
            assert!(violation > 1e-6);
        }
        other => panic!("expected a verification error, got {other:?}"),
    }
}

#[test]
fn capacity_violation_is_reported_by_name() {
    let mut m = MilpModel::new("cap", Sense::Minimize);
    let a = m.add_var("a", Some(0), Some(1), true, 1, BranchClass::Other).unwrap();
    let b = m.add_var("b", Some(0), Some(1), true, 1, BranchClass::Other).unwrap();
    m.add_constraint("cap_1", [(a, 1), (b, 1)], Relation::Le, 1).unwrap();
    let err = read_solution_file("# status optimal\na 1\nb 1\n", &m).unwrap_err();
    assert!(matches!(err, BridgeError::Verification { ref name, .. } if name == "cap_1"), "{err}");
    assert!(err.to_string().contains("cap_1"));
}

#[test]
fn solution_errors() {
    let model = build_cs(&fixtures::table2(), &BuildOptions::default()).unwrap();
    assert!(matches!(read_solution_file("", &model), Err(BridgeError::MissingStatus)));
    assert!(matches!(
        read_solution_file("# status optimal\nz_9 1\n", &model),
        Err(BridgeError::UnknownVariable { line: 2, .. })
    ));
    assert!(matches!(
        read_solution_file("# status optimal\ny_1 one\n", &model),
        Err(BridgeError::Parse { line: 2, .. })
    ));
    assert!(matches!(
        read_solution_file("# status optimal\ny_1 0.5\n", &model),
        Err(BridgeError::Verification { .. })
    ));
    let none = read_solution_file("# status infeasible\n", &model).unwrap();
    assert_eq!(none.status, MilpStatus::Infeasible);
    assert!(none.values.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_models_round_trip(seed in any::<u64>(), n in 1usize..6, m in 1usize..4) {
        let cap = (n as u32).div_ceil(m as u32) + 1;
        let inst = generate(&GenParams::new(n, m, cap, seed)).unwrap();
        for f in [Formulation::Cs, Formulation::Pw, Formulation::CcR] {
            let model = build(f, &inst, &BuildOptions::relax_x()).unwrap();
            let text = lp_text(&model);
            let back = read_lp_file(&text).unwrap();
            prop_assert_eq!(back.num_vars(), model.num_vars());
            prop_assert_eq!(back.num_constraints(), model.num_constraints());
            prop_assert!(semantic(&back) == semantic(&model));
        }
    }
}
