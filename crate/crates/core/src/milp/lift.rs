use super::model::MilpModel;
use super::{Formulation, MilpError};
use crate::model::{Allocation, Customer, Instance, Location, Mode, Plant};
use crate::oracles::{serial_dictatorship, Permutation};

const INTEGRALITY_TOL: f64 = 1e-6;

fn origin_parts(model: &MilpModel) -> Result<(Formulation, &Instance), MilpError> {
    let origin = model.origin().ok_or(MilpError::NoOrigin)?;
    Ok((origin.formulation, &origin.instance))
}

fn set(values: &mut [f64], model: &MilpModel, name: &str, value: f64) {
    if let Some(k) = model.var_index(name) {
        values[k] = value;
    }
}

/// Maps a location and allocation onto a full variable vector of `model`.
///
/// Round-indexed variables follow `order`, the sequence in which customers
/// are processed; plants fill in the order this sequence fills them.
pub fn lift_allocation(
    model: &MilpModel,
    loc: &Location,
    alloc: &Allocation,
    order: &[Customer],
) -> Result<Vec<f64>, MilpError> {
    let (formulation, inst) = origin_parts(model)?;
    let mut values = vec![0.0; model.num_vars()];
    let full = |j: Plant| alloc.occupancy(j) == inst.capacity(j);

    for j in inst.plants() {
        let open = loc.is_open(j);
        set(&mut values, model, &format!("y_{}", j.number()), open as u8 as f64);
        set(
            &mut values,
            model,
            &format!("u_{}", j.number()),
            (open && full(j)) as u8 as f64,
        );
    }
    for (i, j) in alloc.pairs() {
        set(&mut values, model, &format!("x_{}_{}", i.number(), j.number()), 1.0);
    }
    if formulation == Formulation::PwR {
        for (i, j2) in alloc.pairs() {
            for &j in inst.pref(i).iter().take_while(|&&j| j != j2) {
                set(&mut values, model, &format!("v_{}_{}", j.number(), j2.number()), 1.0);
            }
        }
    }

    let round_based = matches!(
        formulation,
        Formulation::Cc | Formulation::CcR | Formulation::ChaPo
    );
    if round_based {
        let mut occ = vec![0u32; inst.n_plants()];
        let mut fills = 0usize;
        for (r, &i) in order.iter().enumerate() {
            let Some(j) = alloc.plant_of(i) else { continue };
            occ[j.index()] += 1;
            if formulation == Formulation::Cc {
                set(
                    &mut values,
                    model,
                    &format!("xr_{}_{}_{}", i.number(), j.number(), r + 1),
                    1.0,
                );
            }
            if occ[j.index()] == inst.capacity(j) {
                fills += 1;
                let round = if formulation == Formulation::Cc { r + 1 } else { fills };
                set(&mut values, model, &format!("ur_{}_{}", j.number(), round), 1.0);
            }
        }
    }
    Ok(values)
}

/// Runs serial dictatorship on the model's instance and lifts the result.
pub fn lift_serial_dictatorship(
    model: &MilpModel,
    loc: &Location,
    perm: &Permutation,
) -> Result<Vec<f64>, MilpError> {
    let (formulation, inst) = origin_parts(model)?;
    let loc = match formulation {
        Formulation::ChaPo => Location::all_open(inst.n_plants()),
        _ => loc.clone(),
    };
    let alloc = serial_dictatorship(inst, &loc, perm).map_err(|_| MilpError::InfeasibleLocation {
        capacity: loc.open_capacity(inst),
        customers: inst.n_customers(),
    })?;
    lift_allocation(model, &loc, &alloc, perm.order())
}

fn integral(values: &[f64], k: usize, name: &str) -> Result<bool, MilpError> {
    let v = values[k];
    if (v - v.round()).abs() > INTEGRALITY_TOL {
        return Err(MilpError::Fractional(name.to_string()));
    }
    Ok(v.round() >= 1.0)
}

/// Recovers the location and allocation encoded by a solution of `model`.
pub fn decode(model: &MilpModel, values: &[f64]) -> Result<(Location, Allocation), MilpError> {
    let origin = model.origin().ok_or(MilpError::NoOrigin)?;
    let inst = &origin.instance;
    let m = inst.n_plants();
    let loc = match (&origin.location, origin.formulation) {
        (Some(loc), _) => loc.clone(),
        (None, Formulation::ChaPo) => Location::all_open(m),
        (None, _) => {
            let mut open = vec![false; m];
            for j in inst.plants() {
                let name = format!("y_{}", j.number());
                let k = model
                    .var_index(&name)
                    .ok_or_else(|| MilpError::UnknownVariable(name.clone()))?;
                open[j.index()] = integral(values, k, &name)?;
            }
            Location::new(open)
        }
    };
    let mut assigned = vec![None; inst.n_customers()];
    for i in inst.customers() {
        for j in inst.plants() {
            let name = format!("x_{}_{}", i.number(), j.number());
            let value = match model.var_index(&name) {
                Some(k) => values[k],
                None => (1..=inst.n_customers())
                    .filter_map(|r| {
                        model.var_index(&format!("xr_{}_{}_{}", i.number(), j.number(), r))
                    })
                    .map(|k| values[k])
                    .sum(),
            };
            if (value - value.round()).abs() > INTEGRALITY_TOL {
                return Err(MilpError::Fractional(name));
            }
            if value.round() >= 1.0 {
                assigned[i.index()] = Some(j);
            }
        }
    }
    if inst.mode() == Mode::Cflcp {
        if let Some(i) = assigned.iter().position(|a| a.is_none()) {
            return Err(crate::model::ModelError::Unassigned(Customer(i)).into());
        }
    }
    let alloc = Allocation::from_assignments(inst, assigned)?;
    Ok((loc, alloc))
}
