//! Small reference instances shipped with the crate.
//!
//! Every fixture is stored as a canonical instance file under `fixtures/`.

use crate::model::{parse_instance, Instance};

pub const TABLE1A_JSON: &str = include_str!("../fixtures/table1a.json");
pub const TABLE1B_JSON: &str = include_str!("../fixtures/table1b.json");
pub const TABLE2_JSON: &str = include_str!("../fixtures/table2.json");
pub const TABLE3_JSON: &str = include_str!("../fixtures/table3.json");
pub const ROTATION3_JSON: &str = include_str!("../fixtures/rotation3.json");

/// All fixtures as `(name, canonical json)`.
pub const ALL: [(&str, &str); 5] = [
    ("table1a", TABLE1A_JSON),
    ("table1b", TABLE1B_JSON),
    ("table2", TABLE2_JSON),
    ("table3", TABLE3_JSON),
    ("rotation3", ROTATION3_JSON),
];

fn load(text: &str) -> Instance {
    parse_instance(text).expect("bundled fixture is valid")
}

/// 4 customers, 4 plants, c=2, f=1000, identical rankings; the skewed
/// preference weights are stored as assignment costs.
pub fn table1a() -> Instance {
    load(TABLE1A_JSON)
}

/// 4 customers, 4 plants, c=2, f=1000, g equal to the rank matrix.
pub fn table1b() -> Instance {
    load(TABLE1B_JSON)
}

/// 8 customers, 4 plants, c=3, f=2.
pub fn table2() -> Instance {
    load(TABLE2_JSON)
}

/// 8 customers, 3 plants, c=3, zero costs.
pub fn table3() -> Instance {
    load(TABLE3_JSON)
}

/// 3 customers, 3 unit-capacity plants whose identity allocation admits a
/// single 3-cycle rotation.
pub fn rotation3() -> Instance {
    load(ROTATION3_JSON)
}

/// The ten cyclic-coalition stable allocations of [`table3`] with every plant
/// open, as customer groups for plants 1, 2 and 3.
pub const TABLE4: [[&[usize]; 3]; 10] = [
    [&[1, 6, 7], &[2, 4, 5], &[3, 8]],
    [&[1, 6, 8], &[2, 4, 5], &[3, 7]],
    [&[1, 6, 8], &[2, 4, 7], &[3, 5]],
    [&[1, 6, 8], &[2, 5, 7], &[3, 4]],
    [&[1, 6, 8], &[4, 5, 7], &[2, 3]],
    [&[1, 7, 8], &[2, 4, 5], &[3, 6]],
    [&[6, 7, 8], &[1, 2, 4], &[3, 5]],
    [&[6, 7, 8], &[1, 2, 5], &[3, 4]],
    [&[6, 7, 8], &[1, 4, 5], &[2, 3]],
    [&[6, 7, 8], &[2, 4, 5], &[1, 3]],
];

/// [`TABLE4`] as allocations on [`table3`].
pub fn table4_allocations() -> Vec<crate::model::Allocation> {
    let inst = table3();
    TABLE4
        .iter()
        .map(|groups| crate::model::Allocation::from_groups(&inst, groups).expect("valid groups"))
        .collect()
}
