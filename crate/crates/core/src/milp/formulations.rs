use super::model::{BranchClass, MilpModel, ModelOrigin, Relation, Sense};
use super::{Formulation, MilpError};
use crate::model::{Customer, Instance, Location, Mode, Plant};

/// Above this many `xr` variables the original cyclic-coalition model is
/// reported as oversized.
const CC_SCALE_WARNING: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Drop integrality on assignment variables only.
    pub relax_x: bool,
    /// Drop every integrality flag. Implies `relax_x`.
    pub relax_all: bool,
    /// Emit the redundant `x <= y` rows where they are optional.
    pub include_vi: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            relax_x: false,
            relax_all: false,
            include_vi: true,
        }
    }
}

impl BuildOptions {
    pub fn relax_x() -> Self {
        BuildOptions {
            relax_x: true,
            ..Self::default()
        }
    }

    pub fn relax_all() -> Self {
        BuildOptions {
            relax_x: true,
            relax_all: true,
            ..Self::default()
        }
    }

    fn relaxed(&self, class: BranchClass) -> bool {
        self.relax_all || (self.relax_x && class == BranchClass::Assignment)
    }
}

/// Builds any of the seven stable formulations.
pub fn build(
    formulation: Formulation,
    inst: &Instance,
    opts: &BuildOptions,
) -> Result<MilpModel, MilpError> {
    match formulation {
        Formulation::Cs => build_cs(inst, opts),
        Formulation::CsR => build_cs_r(inst, opts),
        Formulation::Pw => build_pw(inst, opts),
        Formulation::PwR => build_pw_r(inst, opts),
        Formulation::Cc => build_cc(inst, opts),
        Formulation::CcR => build_cc_r(inst, opts),
        Formulation::ChaPo => build_cha_po(inst, opts),
        Formulation::SecondLevel => Err(MilpError::NoOrigin),
    }
}

fn require_mode(inst: &Instance, formulation: Formulation) -> Result<(), MilpError> {
    let expected = formulation.mode();
    if inst.mode() != expected {
        return Err(MilpError::WrongMode {
            formulation: formulation.name(),
            expected: expected.as_str(),
            found: inst.mode().as_str(),
        });
    }
    Ok(())
}

fn new_model(formulation: Formulation, inst: &Instance, sense: Sense) -> MilpModel {
    let mut model = MilpModel::new(formulation.name(), sense);
    model.set_origin(ModelOrigin {
        formulation,
        instance: inst.clone(),
        location: None,
    });
    model
}

/// Shorthand for 1-based names.
fn n1(k: usize) -> usize {
    k + 1
}

struct Core {
    y: Vec<usize>,
    x: Vec<Vec<usize>>,
}

fn add_y(model: &mut MilpModel, inst: &Instance, opts: &BuildOptions) -> Vec<usize> {
    inst.plants()
        .map(|j| {
            model.add_binary(
                format!("y_{}", j.number()),
                inst.open_cost(j) as i64,
                BranchClass::Location,
                opts.relaxed(BranchClass::Location),
            )
        })
        .collect()
}

fn add_u(model: &mut MilpModel, inst: &Instance, opts: &BuildOptions) -> Vec<usize> {
    inst.plants()
        .map(|j| {
            model.add_binary(
                format!("u_{}", j.number()),
                0,
                BranchClass::Fill,
                opts.relaxed(BranchClass::Fill),
            )
        })
        .collect()
}

fn add_x(model: &mut MilpModel, inst: &Instance, opts: &BuildOptions) -> Vec<Vec<usize>> {
    inst.customers()
        .map(|i| {
            inst.plants()
                .map(|j| {
                    model.add_binary(
                        format!("x_{}_{}", i.number(), j.number()),
                        inst.assign_cost(i, j) as i64,
                        BranchClass::Assignment,
                        opts.relaxed(BranchClass::Assignment),
                    )
                })
                .collect()
        })
        .collect()
}

/// `ur_{j}_{r}` for every plant and `rounds` rounds, indexed `[j][r]`.
fn add_round_u(
    model: &mut MilpModel,
    inst: &Instance,
    rounds: usize,
    opts: &BuildOptions,
) -> Vec<Vec<usize>> {
    inst.plants()
        .map(|j| {
            (0..rounds)
                .map(|r| {
                    model.add_binary(
                        format!("ur_{}_{}", j.number(), n1(r)),
                        0,
                        BranchClass::Fill,
                        opts.relaxed(BranchClass::Fill),
                    )
                })
                .collect()
        })
        .collect()
}

fn assignment_rows(model: &mut MilpModel, inst: &Instance, x: &[Vec<usize>]) {
    for i in inst.customers() {
        let terms = x[i.index()].iter().map(|&k| (k, 1)).collect();
        model.row(format!("assign_{}", i.number()), terms, Relation::Eq, 1);
    }
}

fn link_rows(model: &mut MilpModel, inst: &Instance, core: &Core) {
    for i in inst.customers() {
        for j in inst.plants() {
            model.row(
                format!("link_{}_{}", i.number(), j.number()),
                vec![(core.x[i.index()][j.index()], 1), (core.y[j.index()], -1)],
                Relation::Le,
                0,
            );
        }
    }
}

/// The split capacity rows Σx <= (c-1)y + u and c·u <= Σx.
fn split_capacity_rows(model: &mut MilpModel, inst: &Instance, core: &Core, u: &[usize]) {
    for j in inst.plants() {
        let c = inst.capacity(j) as i64;
        let mut terms: Vec<(usize, i64)> =
            inst.customers().map(|i| (core.x[i.index()][j.index()], 1)).collect();
        terms.push((core.y[j.index()], -(c - 1)));
        terms.push((u[j.index()], -1));
        model.row(format!("cap_hi_{}", j.number()), terms, Relation::Le, 0);
    }
    for j in inst.plants() {
        let c = inst.capacity(j) as i64;
        let mut terms: Vec<(usize, i64)> =
            inst.customers().map(|i| (core.x[i.index()][j.index()], -1)).collect();
        terms.push((u[j.index()], c));
        model.row(format!("cap_lo_{}", j.number()), terms, Relation::Le, 0);
    }
}

/// y_j <= u_j + Σ_{j' ⪯_i j} x_ij' for every (i, j).
fn reduced_customer_rows(model: &mut MilpModel, inst: &Instance, core: &Core, u: &[usize]) {
    for i in inst.customers() {
        let list = inst.pref(i);
        for j in inst.plants() {
            let r = inst.rank(i, j).expect("complete lists") as usize;
            let mut terms = vec![(core.y[j.index()], 1), (u[j.index()], -1)];
            terms.extend(list[..r].iter().map(|jp| (core.x[i.index()][jp.index()], -1)));
            model.row(
                format!("stab_{}_{}", i.number(), j.number()),
                terms,
                Relation::Le,
                0,
            );
        }
    }
}

fn basic_capacity_rows(model: &mut MilpModel, inst: &Instance, core: &Core) {
    for j in inst.plants() {
        let mut terms: Vec<(usize, i64)> =
            inst.customers().map(|i| (core.x[i.index()][j.index()], 1)).collect();
        terms.push((core.y[j.index()], -(inst.capacity(j) as i64)));
        model.row(format!("cap_{}", j.number()), terms, Relation::Le, 0);
    }
}

/// Customer-stable model: a plant that is open and not full must not be
/// preferred by anyone assigned elsewhere.
pub fn build_cs(inst: &Instance, opts: &BuildOptions) -> Result<MilpModel, MilpError> {
    require_mode(inst, Formulation::Cs)?;
    let mut model = new_model(Formulation::Cs, inst, Sense::Minimize);
    let y = add_y(&mut model, inst, opts);
    let x = add_x(&mut model, inst, opts);
    let core = Core { y, x };
    assignment_rows(&mut model, inst, &core.x);
    basic_capacity_rows(&mut model, inst, &core);
    if opts.include_vi {
        link_rows(&mut model, inst, &core);
    }
    // c_j y_j <= c_j Σ_{j' ⪯_i j} x_ij' + Σ_{i' != i} x_i'j
    for i in inst.customers() {
        let list = inst.pref(i);
        for j in inst.plants() {
            let c = inst.capacity(j) as i64;
            let r = inst.rank(i, j).expect("complete lists") as usize;
            let mut terms = vec![(core.y[j.index()], c)];
            terms.extend(list[..r].iter().map(|jp| (core.x[i.index()][jp.index()], -c)));
            terms.extend(
                inst.customers()
                    .filter(|&i2| i2 != i)
                    .map(|i2| (core.x[i2.index()][j.index()], -1)),
            );
            model.row(
                format!("stab_{}_{}", i.number(), j.number()),
                terms,
                Relation::Le,
                0,
            );
        }
    }
    Ok(model)
}

/// Customer-stable model with full-plant indicators `u_j`.
pub fn build_cs_r(inst: &Instance, opts: &BuildOptions) -> Result<MilpModel, MilpError> {
    require_mode(inst, Formulation::CsR)?;
    let mut model = new_model(Formulation::CsR, inst, Sense::Minimize);
    let y = add_y(&mut model, inst, opts);
    let u = add_u(&mut model, inst, opts);
    let x = add_x(&mut model, inst, opts);
    let core = Core { y, x };
    assignment_rows(&mut model, inst, &core.x);
    split_capacity_rows(&mut model, inst, &core, &u);
    link_rows(&mut model, inst, &core);
    reduced_customer_rows(&mut model, inst, &core, &u);
    Ok(model)
}

/// Pairwise-stable model.
pub fn build_pw(inst: &Instance, opts: &BuildOptions) -> Result<MilpModel, MilpError> {
    require_mode(inst, Formulation::Pw)?;
    let mut model = new_model(Formulation::Pw, inst, Sense::Minimize);
    let y = add_y(&mut model, inst, opts);
    let x = add_x(&mut model, inst, opts);
    let core = Core { y, x };
    assignment_rows(&mut model, inst, &core.x);
    basic_capacity_rows(&mut model, inst, &core);
    if opts.include_vi {
        link_rows(&mut model, inst, &core);
    }
    // c_j (y_j + x_ij2 - 1) <= Σ_{i' != i : j ≺_i' j2} x_i'j   for j ≺_i j2
    for i in inst.customers() {
        let list = inst.pref(i);
        for (a, &j) in list.iter().enumerate() {
            let c = inst.capacity(j) as i64;
            for &j2 in &list[a + 1..] {
                let mut terms = vec![(core.y[j.index()], c), (core.x[i.index()][j2.index()], c)];
                terms.extend(
                    inst.customers()
                        .filter(|&i2| i2 != i && inst.prefers_unchecked(i2, j, j2))
                        .map(|i2| (core.x[i2.index()][j.index()], -1)),
                );
                model.row(
                    format!("pair_{}_{}_{}", i.number(), j.number(), j2.number()),
                    terms,
                    Relation::Le,
                    c,
                );
            }
        }
    }
    Ok(model)
}

/// Pairwise-stable model with full-plant indicators and pair indicators
/// `v_{j}_{j2}`.
pub fn build_pw_r(inst: &Instance, opts: &BuildOptions) -> Result<MilpModel, MilpError> {
    require_mode(inst, Formulation::PwR)?;
    let m = inst.n_plants();
    let mut model = new_model(Formulation::PwR, inst, Sense::Minimize);
    let y = add_y(&mut model, inst, opts);
    let u = add_u(&mut model, inst, opts);
    let mut v = vec![vec![usize::MAX; m]; m];
    for j in inst.plants() {
        for j2 in inst.plants().filter(|&j2| j2 != j) {
            v[j.index()][j2.index()] = model.add_binary(
                format!("v_{}_{}", j.number(), j2.number()),
                0,
                BranchClass::Pair,
                opts.relaxed(BranchClass::Pair),
            );
        }
    }
    let x = add_x(&mut model, inst, opts);
    let core = Core { y, x };
    assignment_rows(&mut model, inst, &core.x);
    split_capacity_rows(&mut model, inst, &core, &u);
    link_rows(&mut model, inst, &core);
    reduced_customer_rows(&mut model, inst, &core, &u);
    for j in inst.plants() {
        for j2 in inst.plants().filter(|&j2| j2 > j) {
            model.row(
                format!("vpair_{}_{}", j.number(), j2.number()),
                vec![(v[j.index()][j2.index()], 1), (v[j2.index()][j.index()], 1)],
                Relation::Le,
                1,
            );
        }
    }
    for i in inst.customers() {
        let list = inst.pref(i);
        for (a, &j) in list.iter().enumerate() {
            for &j2 in &list[a + 1..] {
                model.row(
                    format!("vlink_{}_{}_{}", i.number(), j.number(), j2.number()),
                    vec![
                        (core.x[i.index()][j2.index()], 1),
                        (v[j.index()][j2.index()], -1),
                    ],
                    Relation::Le,
                    0,
                );
            }
        }
    }
    Ok(model)
}

/// Cyclic-coalition-stable model over customer processing rounds.
pub fn build_cc(inst: &Instance, opts: &BuildOptions) -> Result<MilpModel, MilpError> {
    require_mode(inst, Formulation::Cc)?;
    let n = inst.n_customers();
    let m = inst.n_plants();
    if n * n * m > CC_SCALE_WARNING {
        log::warn!(
            "cc model with {} round-indexed assignment variables exceeds {CC_SCALE_WARNING}",
            n * n * m
        );
    }
    let mut model = new_model(Formulation::Cc, inst, Sense::Minimize);
    let y = add_y(&mut model, inst, opts);
    // xr[i][j][r]
    let mut xr = vec![vec![Vec::with_capacity(n); m]; n];
    for i in inst.customers() {
        for j in inst.plants() {
            for r in 0..n {
                let k = model.add_binary(
                    format!("xr_{}_{}_{}", i.number(), j.number(), n1(r)),
                    inst.assign_cost(i, j) as i64,
                    BranchClass::Assignment,
                    opts.relaxed(BranchClass::Assignment),
                );
                xr[i.index()][j.index()].push(k);
            }
        }
    }
    let ur = add_round_u(&mut model, inst, n, opts);

    for i in inst.customers() {
        let terms = xr[i.index()].iter().flatten().map(|&k| (k, 1)).collect();
        model.row(format!("assign_{}", i.number()), terms, Relation::Eq, 1);
    }
    for r in 0..n {
        let terms = (0..n)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| (xr[i][j][r], 1))
            .collect();
        model.row(format!("perm_{}", n1(r)), terms, Relation::Eq, 1);
    }
    // Cumulative capacity rows per round.
    for j in inst.plants() {
        let c = inst.capacity(j) as i64;
        for r in 0..n {
            let mut terms: Vec<(usize, i64)> = (0..n)
                .flat_map(|i| (0..=r).map(move |r2| (i, r2)))
                .map(|(i, r2)| (xr[i][j.index()][r2], 1))
                .collect();
            terms.push((y[j.index()], -(c - 1)));
            terms.extend((0..=r).map(|r2| (ur[j.index()][r2], -1)));
            model.row(
                format!("cap_hi_{}_{}", j.number(), n1(r)),
                terms,
                Relation::Le,
                0,
            );
        }
    }
    for j in inst.plants() {
        let c = inst.capacity(j) as i64;
        for r in 0..n {
            let mut terms: Vec<(usize, i64)> = (0..=r).map(|r2| (ur[j.index()][r2], c)).collect();
            terms.extend(
                (0..n)
                    .flat_map(|i| (0..=r).map(move |r2| (i, r2)))
                    .map(|(i, r2)| (xr[i][j.index()][r2], -1)),
            );
            model.row(
                format!("cap_lo_{}_{}", j.number(), n1(r)),
                terms,
                Relation::Le,
                0,
            );
        }
    }
    if opts.include_vi {
        for i in inst.customers() {
            for j in inst.plants() {
                let mut terms: Vec<(usize, i64)> =
                    xr[i.index()][j.index()].iter().map(|&k| (k, 1)).collect();
                terms.push((y[j.index()], -1));
                model.row(
                    format!("link_{}_{}", i.number(), j.number()),
                    terms,
                    Relation::Le,
                    0,
                );
            }
        }
    }
    for j in inst.plants() {
        let mut terms: Vec<(usize, i64)> = ur[j.index()].iter().map(|&k| (k, 1)).collect();
        terms.push((y[j.index()], -1));
        model.row(format!("fillopen_{}", j.number()), terms, Relation::Le, 0);
    }
    for r in 0..n {
        let terms = (0..m).map(|j| (ur[j][r], 1)).collect();
        model.row(format!("fillonce_{}", n1(r)), terms, Relation::Le, 1);
    }
    // y_j - Σ_{r'<r} u_j^r' <= Σ_{j' ⪯_i j} Σ_{r'<=r} xr_ij'r' + Σ_{j'} Σ_{r'>r} xr_ij'r'
    for i in inst.customers() {
        let list = inst.pref(i);
        for j in inst.plants() {
            let rank = inst.rank(i, j).expect("complete lists") as usize;
            for r in 0..n {
                let mut terms = vec![(y[j.index()], 1)];
                terms.extend((0..r).map(|r2| (ur[j.index()][r2], -1)));
                for jp in &list[..rank] {
                    terms.extend((0..=r).map(|r2| (xr[i.index()][jp.index()][r2], -1)));
                }
                for jp in 0..m {
                    terms.extend((r + 1..n).map(|r2| (xr[i.index()][jp][r2], -1)));
                }
                model.row(
                    format!("pref_{}_{}_{}", i.number(), j.number(), n1(r)),
                    terms,
                    Relation::Le,
                    0,
                );
            }
        }
    }
    Ok(model)
}

/// Shared fill-order rows of the reduced cyclic-coalition and house
/// allocation models: rounds fill at most one plant each, in sequence.
fn round_rows(model: &mut MilpModel, m: usize, ur: &[Vec<usize>]) {
    if m == 0 {
        return;
    }
    let terms = (0..m).map(|j| (ur[j][0], 1)).collect();
    model.row("round_1".into(), terms, Relation::Le, 1);
    for r in 1..m {
        let mut terms: Vec<(usize, i64)> = (0..m).map(|j| (ur[j][r], 1)).collect();
        terms.extend((0..m).map(|j| (ur[j][r - 1], -1)));
        model.row(format!("round_{}", n1(r)), terms, Relation::Le, 0);
    }
}

/// Cyclic-coalition-stable model over plant fill order.
pub fn build_cc_r(inst: &Instance, opts: &BuildOptions) -> Result<MilpModel, MilpError> {
    require_mode(inst, Formulation::CcR)?;
    let m = inst.n_plants();
    let mut model = new_model(Formulation::CcR, inst, Sense::Minimize);
    let y = add_y(&mut model, inst, opts);
    let x = add_x(&mut model, inst, opts);
    let ur = add_round_u(&mut model, inst, m, opts);
    let core = Core { y, x };
    assignment_rows(&mut model, inst, &core.x);
    for j in inst.plants() {
        let c = inst.capacity(j) as i64;
        let mut terms: Vec<(usize, i64)> =
            inst.customers().map(|i| (core.x[i.index()][j.index()], 1)).collect();
        terms.push((core.y[j.index()], -(c - 1)));
        terms.extend(ur[j.index()].iter().map(|&k| (k, -1)));
        model.row(format!("cap_hi_{}", j.number()), terms, Relation::Le, 0);
    }
    for j in inst.plants() {
        let c = inst.capacity(j) as i64;
        let mut terms: Vec<(usize, i64)> = ur[j.index()].iter().map(|&k| (k, c)).collect();
        terms.extend(inst.customers().map(|i| (core.x[i.index()][j.index()], -1)));
        model.row(format!("cap_lo_{}", j.number()), terms, Relation::Le, 0);
    }
    link_rows(&mut model, inst, &core);
    for j in inst.plants() {
        let mut terms: Vec<(usize, i64)> = ur[j.index()].iter().map(|&k| (k, 1)).collect();
        terms.push((core.y[j.index()], -1));
        model.row(format!("fillopen_{}", j.number()), terms, Relation::Le, 0);
    }
    round_rows(&mut model, m, &ur);
    // x_ij + Σ_{r'<r} u_j^r' + Σ_{j' ≺_i j} u_j'^r <= 1 + y_j
    for i in inst.customers() {
        let list = inst.pref(i);
        for j in inst.plants() {
            let rank = inst.rank(i, j).expect("complete lists") as usize;
            for r in 0..m {
                let mut terms = vec![(core.x[i.index()][j.index()], 1), (core.y[j.index()], -1)];
                terms.extend((0..r).map(|r2| (ur[j.index()][r2], 1)));
                terms.extend(list[..rank - 1].iter().map(|jp| (ur[jp.index()][r], 1)));
                model.row(
                    format!("full_{}_{}_{}", i.number(), j.number(), n1(r)),
                    terms,
                    Relation::Le,
                    1,
                );
            }
        }
    }
    // y_j - Σ_r u_j^r <= Σ_{j' ⪯_i j} x_ij'
    for i in inst.customers() {
        let list = inst.pref(i);
        for j in inst.plants() {
            let rank = inst.rank(i, j).expect("complete lists") as usize;
            let mut terms = vec![(core.y[j.index()], 1)];
            terms.extend(ur[j.index()].iter().map(|&k| (k, -1)));
            terms.extend(list[..rank].iter().map(|jp| (core.x[i.index()][jp.index()], -1)));
            model.row(
                format!("empty_{}_{}", i.number(), j.number()),
                terms,
                Relation::Le,
                0,
            );
        }
    }
    Ok(model)
}

/// Maximum-cardinality Pareto optimal matching for house allocation.
///
/// All houses are open; `x` is continuous and only exists for ranked pairs.
pub fn build_cha_po(inst: &Instance, opts: &BuildOptions) -> Result<MilpModel, MilpError> {
    require_mode(inst, Formulation::ChaPo)?;
    let m = inst.n_plants();
    let mut model = new_model(Formulation::ChaPo, inst, Sense::Maximize);
    let mut x: Vec<Vec<Option<usize>>> = vec![vec![None; m]; inst.n_customers()];
    for i in inst.customers() {
        for j in inst.plants().filter(|&j| inst.rank(i, j).is_some()) {
            let k = model
                .add_var(
                    format!("x_{}_{}", i.number(), j.number()),
                    Some(0),
                    Some(1),
                    false,
                    1,
                    BranchClass::Assignment,
                )
                .expect("builder names are unique");
            x[i.index()][j.index()] = Some(k);
        }
    }
    let ur = add_round_u(&mut model, inst, m, opts);
    let xs = |i: Customer, plants: &[Plant]| -> Vec<usize> {
        plants.iter().filter_map(|j| x[i.index()][j.index()]).collect()
    };

    for i in inst.customers() {
        let terms = xs(i, inst.pref(i)).into_iter().map(|k| (k, 1)).collect();
        model.row(format!("assign_{}", i.number()), terms, Relation::Le, 1);
    }
    for j in inst.plants() {
        let c = inst.capacity(j) as i64;
        let mut terms: Vec<(usize, i64)> = inst
            .customers()
            .filter_map(|i| x[i.index()][j.index()])
            .map(|k| (k, 1))
            .collect();
        terms.extend(ur[j.index()].iter().map(|&k| (k, -1)));
        model.row(format!("cap_hi_{}", j.number()), terms, Relation::Le, c - 1);
    }
    for j in inst.plants() {
        let c = inst.capacity(j) as i64;
        let mut terms: Vec<(usize, i64)> = ur[j.index()].iter().map(|&k| (k, c)).collect();
        terms.extend(
            inst.customers()
                .filter_map(|i| x[i.index()][j.index()])
                .map(|k| (k, -1)),
        );
        model.row(format!("cap_lo_{}", j.number()), terms, Relation::Le, 0);
    }
    for j in inst.plants() {
        let terms = ur[j.index()].iter().map(|&k| (k, 1)).collect();
        model.row(format!("fillopen_{}", j.number()), terms, Relation::Le, 1);
    }
    round_rows(&mut model, m, &ur);
    for i in inst.customers() {
        let list = inst.pref(i);
        for (a, &j) in list.iter().enumerate() {
            let xij = x[i.index()][j.index()].expect("ranked pair");
            for r in 0..m {
                let mut terms = vec![(xij, 1)];
                terms.extend((0..r).map(|r2| (ur[j.index()][r2], 1)));
                terms.extend(list[..a].iter().map(|jp| (ur[jp.index()][r], 1)));
                model.row(
                    format!("full_{}_{}_{}", i.number(), j.number(), n1(r)),
                    terms,
                    Relation::Le,
                    2,
                );
            }
        }
    }
    for i in inst.customers() {
        let list = inst.pref(i);
        for (a, &j) in list.iter().enumerate() {
            let mut terms: Vec<(usize, i64)> = ur[j.index()].iter().map(|&k| (k, -1)).collect();
            terms.extend(xs(i, &list[..=a]).into_iter().map(|k| (k, -1)));
            model.row(
                format!("empty_{}_{}", i.number(), j.number()),
                terms,
                Relation::Le,
                -1,
            );
        }
    }
    Ok(model)
}

/// The preference-maximizing allocation problem for a fixed location.
///
/// With `pref_target = Some(p)`, minimizes assignment cost subject to
/// Σ p_ij x_ij = p instead.
pub fn build_second_level(
    inst: &Instance,
    loc: &Location,
    pref_target: Option<i64>,
    opts: &BuildOptions,
) -> Result<MilpModel, MilpError> {
    if inst.mode() != Mode::Cflcp {
        return Err(MilpError::WrongMode {
            formulation: Formulation::SecondLevel.name(),
            expected: Mode::Cflcp.as_str(),
            found: inst.mode().as_str(),
        });
    }
    loc.check(inst)?;
    let capacity = loc.open_capacity(inst);
    if capacity < inst.n_customers() as u64 {
        return Err(MilpError::InfeasibleLocation {
            capacity,
            customers: inst.n_customers(),
        });
    }
    let mut model = MilpModel::new(Formulation::SecondLevel.name(), Sense::Minimize);
    model.set_origin(ModelOrigin {
        formulation: Formulation::SecondLevel,
        instance: inst.clone(),
        location: Some(loc.clone()),
    });
    let open: Vec<Plant> = loc.open_plants().collect();
    let mut x = vec![Vec::with_capacity(open.len()); inst.n_customers()];
    for i in inst.customers() {
        for &j in &open {
            let rank = inst.rank(i, j).expect("complete lists") as i64;
            let obj = match pref_target {
                None => rank,
                Some(_) => inst.assign_cost(i, j) as i64,
            };
            let k = model.add_binary(
                format!("x_{}_{}", i.number(), j.number()),
                obj,
                BranchClass::Assignment,
                opts.relaxed(BranchClass::Assignment),
            );
            x[i.index()].push(k);
        }
    }
    for i in inst.customers() {
        let terms = x[i.index()].iter().map(|&k| (k, 1)).collect();
        model.row(format!("assign_{}", i.number()), terms, Relation::Eq, 1);
    }
    for (a, &j) in open.iter().enumerate() {
        let terms = inst.customers().map(|i| (x[i.index()][a], 1)).collect();
        model.row(
            format!("cap_{}", j.number()),
            terms,
            Relation::Le,
            inst.capacity(j) as i64,
        );
    }
    if opts.include_vi {
        for i in inst.customers() {
            for (a, &j) in open.iter().enumerate() {
                model.row(
                    format!("link_{}_{}", i.number(), j.number()),
                    vec![(x[i.index()][a], 1)],
                    Relation::Le,
                    1,
                );
            }
        }
    }
    if let Some(target) = pref_target {
        let terms = inst
            .customers()
            .flat_map(|i| {
                let x = &x;
                open.iter().enumerate().map(move |(a, &j)| {
                    (x[i.index()][a], inst.rank(i, j).expect("complete lists") as i64)
                })
            })
            .collect();
        model.row("pref_level".into(), terms, Relation::Eq, target);
    }
    Ok(model)
}
