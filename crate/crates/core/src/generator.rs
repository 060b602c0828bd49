//! Seeded random instances.
//!
//! The stream is splitmix64. Integers in `[a, b]` are `a + bounded(b - a + 1)`
//! with Lemire's multiply-and-reject method. Draw order: `f_1..f_m`, then
//! `g_11..g_nm` row-major, then one Fisher–Yates shuffle per customer in
//! customer order, starting from `[1..m]` and swapping position `k` with
//! `bounded(k + 1)` for `k = m-1` down to `1`.

use thiserror::Error;

use crate::model::{Instance, InstanceData, Mode};

/// The splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, s)`; `s` must be positive.
    pub fn bounded(&mut self, s: u64) -> u64 {
        assert!(s > 0, "empty range");
        let mut m = self.next_u64() as u128 * s as u128;
        let mut low = m as u64;
        if low < s {
            let threshold = s.wrapping_neg() % s;
            while low < threshold {
                m = self.next_u64() as u128 * s as u128;
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform in `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "empty range");
        lo + self.bounded(hi - lo + 1)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for k in (1..items.len()).rev() {
            let j = self.bounded(k as u64 + 1) as usize;
            items.swap(k, j);
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("{0} must be positive")]
    Zero(&'static str),
    #[error("range {name} [{lo}, {hi}] is empty")]
    EmptyRange { name: &'static str, lo: u64, hi: u64 },
    #[error("unknown preset '{0}'; expected one of the listed presets or n-m-c")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub n_customers: usize,
    pub n_plants: usize,
    pub capacity: u32,
    pub open_cost: (u64, u64),
    pub assign_cost: (u64, u64),
    pub seed: u64,
}

impl GenParams {
    /// Default cost ranges: `f` in [100, 130], `g` in [10, 30].
    pub fn new(n_customers: usize, n_plants: usize, capacity: u32, seed: u64) -> Self {
        GenParams {
            n_customers,
            n_plants,
            capacity,
            open_cost: (100, 130),
            assign_cost: (10, 30),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n_customers == 0 {
            return Err(GenError::Zero("n_customers"));
        }
        if self.n_plants == 0 {
            return Err(GenError::Zero("n_plants"));
        }
        if self.capacity == 0 {
            return Err(GenError::Zero("capacity"));
        }
        for (name, (lo, hi)) in [("open_cost", self.open_cost), ("assign_cost", self.assign_cost)] {
            if lo > hi {
                return Err(GenError::EmptyRange { name, lo, hi });
            }
        }
        Ok(())
    }
}

/// Draws an instance; identical parameters give identical instances.
pub fn generate(params: &GenParams) -> Result<Instance, GenError> {
    params.validate()?;
    let (n, m) = (params.n_customers, params.n_plants);
    let mut rng = SplitMix64::new(params.seed);
    let open_cost = (0..m)
        .map(|_| rng.range_inclusive(params.open_cost.0, params.open_cost.1))
        .collect();
    let assign_cost = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| rng.range_inclusive(params.assign_cost.0, params.assign_cost.1))
                .collect()
        })
        .collect();
    let pref = (0..n)
        .map(|_| {
            let mut list: Vec<usize> = (1..=m).collect();
            rng.shuffle(&mut list);
            list
        })
        .collect();
    let data = InstanceData {
        mode: Mode::Cflcp,
        open_cost,
        assign_cost,
        capacity: vec![params.capacity; m],
        pref,
    };
    Ok(Instance::from_data(data).expect("generated data is valid"))
}

/// A named size class: customers, plants and uniform capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub n_customers: usize,
    pub n_plants: usize,
    pub capacity: u32,
}

impl Preset {
    pub fn name(&self) -> String {
        format!("{}-{}-{}", self.n_customers, self.n_plants, self.capacity)
    }

    pub fn params(&self, seed: u64) -> GenParams {
        GenParams::new(self.n_customers, self.n_plants, self.capacity, seed)
    }

    /// A preset name or any `n-m-c` triple.
    pub fn parse(name: &str) -> Result<Self, GenError> {
        let parts: Vec<&str> = name.trim().split('-').collect();
        let bad = || GenError::UnknownPreset(name.to_string());
        let [n, m, c] = parts.as_slice() else {
            return Err(bad());
        };
        let preset = Preset {
            n_customers: n.parse().map_err(|_| bad())?,
            n_plants: m.parse().map_err(|_| bad())?,
            capacity: c.parse().map_err(|_| bad())?,
        };
        if preset.n_customers == 0 || preset.n_plants == 0 || preset.capacity == 0 {
            return Err(bad());
        }
        Ok(preset)
    }
}

const fn preset(n_customers: usize, n_plants: usize, capacity: u32) -> Preset {
    Preset {
        n_customers,
        n_plants,
        capacity,
    }
}

/// The benchmark grid: 50 customers with 5 or 10 plants and capacity 12 or
/// 20; 100 customers with 5 to 20 plants and capacity 24 or 40.
pub const PRESETS: [Preset; 12] = [
    preset(50, 5, 12),
    preset(50, 5, 20),
    preset(50, 10, 12),
    preset(50, 10, 20),
    preset(100, 5, 24),
    preset(100, 5, 40),
    preset(100, 10, 24),
    preset(100, 10, 40),
    preset(100, 15, 24),
    preset(100, 15, 40),
    preset(100, 20, 24),
    preset(100, 20, 40),
];

/// Seeds used when a suite is run without an explicit list.
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// One line of a suite manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub suite: String,
    pub seed: u64,
    pub params: GenParams,
    pub file: String,
}

pub const MANIFEST_HEADER: &str = "suite,seed,n_customers,n_plants,capacity,f_min,f_max,g_min,g_max,file";

pub fn manifest_csv(rows: &[ManifestRow]) -> String {
    let mut out = String::from(MANIFEST_HEADER);
    out.push('\n');
    for r in rows {
        let p = &r.params;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.suite,
            r.seed,
            p.n_customers,
            p.n_plants,
            p.capacity,
            p.open_cost.0,
            p.open_cost.1,
            p.assign_cost.0,
            p.assign_cost.1,
            r.file
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // Reference outputs of the published splitmix64 for seed 0.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn bounded_matches_widening_reference() {
        // Oracle: Lemire's method restated with u128 arithmetic and an
        // explicit rejection zone of size 2^64 mod s.
        fn reference(seed: u64, s: u64, draws: usize) -> Vec<u64> {
            let mut raw = SplitMix64::new(seed);
            let zone = ((1u128 << 64) % s as u128) as u64;
            let mut out = Vec::new();
            while out.len() < draws {
                let m = raw.next_u64() as u128 * s as u128;
                if (m as u64) >= zone {
                    out.push((m >> 64) as u64);
                }
            }
            out
        }
        for s in [1u64, 2, 3, 7, 21, 31, 1000, u64::MAX / 3 + 7] {
            let mut rng = SplitMix64::new(42);
            let got: Vec<u64> = (0..200).map(|_| rng.bounded(s)).collect();
            assert_eq!(got, reference(42, s, 200), "s = {s}");
            assert!(got.iter().all(|&v| v < s));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GenParams::new(50, 10, 12, 7);
        let a = generate(&p).unwrap().to_json();
        let b = generate(&p).unwrap().to_json();
        assert_eq!(a, b);
        let other = generate(&GenParams { seed: 8, ..p }).unwrap().to_json();
        assert_ne!(a, other);
    }

    #[test]
    fn generated_values_respect_ranges() {
        for seed in 0..20 {
            let inst = generate(&GenParams::new(30, 7, 5, seed)).unwrap();
            for j in inst.plants() {
                assert!((100..=130).contains(&inst.open_cost(j)));
                assert_eq!(inst.capacity(j), 5);
            }
            for i in inst.customers() {
                for j in inst.plants() {
                    assert!((10..=30).contains(&inst.assign_cost(i, j)));
                }
                let mut list: Vec<usize> = inst.pref(i).iter().map(|j| j.number()).collect();
                list.sort_unstable();
                assert_eq!(list, (1..=7).collect::<Vec<_>>());
            }
            assert!(inst.validation().is_valid());
        }
    }

    #[test]
    fn top_rank_is_uniform() {
        let m = 5usize;
        let draws = 10_000usize;
        let mut rng = SplitMix64::new(2024);
        let mut counts = vec![0usize; m];
        for _ in 0..draws {
            let mut list: Vec<usize> = (0..m).collect();
            rng.shuffle(&mut list);
            counts[list[0]] += 1;
        }
        let p = 1.0 / m as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() <= 3.0 * sigma, "count {c} vs {mean} ± {}", 3.0 * sigma);
        }
    }

    #[test]
    fn presets_parse_and_round_trip() {
        for p in PRESETS {
            assert_eq!(Preset::parse(&p.name()).unwrap(), p);
        }
        assert_eq!(PRESETS[0].name(), "50-5-12");
        assert!(Preset::parse("50-5").is_err());
        assert!(Preset::parse("50-0-12").is_err());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = GenParams::new(3, 2, 1, 0);
        p.capacity = 0;
        assert_eq!(generate(&p).unwrap_err(), GenError::Zero("capacity"));
        let mut p = GenParams::new(3, 2, 1, 0);
        p.assign_cost = (5, 4);
        assert!(matches!(generate(&p), Err(GenError::EmptyRange { .. })));
    }

    #[test]
    fn manifest_has_header_and_rows() {
        let rows = vec![ManifestRow {
            suite: "50-5-12".into(),
            seed: 3,
            params: GenParams::new(50, 5, 12, 3),
            file: "50-5-12_s3.json".into(),
        }];
        let csv = manifest_csv(&rows);
        assert_eq!(
            csv,
            format!("{MANIFEST_HEADER}\n50-5-12,3,50,5,12,100,130,10,30,50-5-12_s3.json\n")
        );
    }
}
