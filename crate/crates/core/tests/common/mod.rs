#![allow(dead_code)]

use std::collections::BTreeMap;

use gridmix::types::{CarbonTable, Fleet, FuelType, HourlySeries};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use FuelType::*;

/// Fleet fuels (no storage, no `Other`).
pub const FLEET_FUELS: [FuelType; 8] = [
    Biomass,
    Coal,
    NaturalGasTurbine,
    NaturalGasCombinedCycle,
    Hydroelectric,
    Nuclear,
    Photovoltaic,
    Wind,
];

pub fn series(values: Vec<f64>) -> HourlySeries {
    HourlySeries::new("test", values).unwrap()
}

pub fn fleet(entries: Vec<(FuelType, Vec<f64>)>) -> Fleet {
    Fleet::with_default_curtailable(entries.into_iter().map(|(f, v)| (f, series(v))).collect()).unwrap()
}

pub fn caps(entries: &[(FuelType, f64)]) -> BTreeMap<FuelType, f64> {
    entries.iter().cloned().collect()
}

/// Picks `n` distinct fleet fuels.
pub fn pick_fuels(rng: &mut ChaCha8Rng, n: usize) -> Vec<FuelType> {
    let mut pool = FLEET_FUELS.to_vec();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(pool.remove(rng.gen_range(0..pool.len())));
    }
    out
}

/// Carbon table whose intensities are multiples of 1/1024, so products with
/// small integers and their sums are exact in binary floating point.
/// Drawing from a narrow range makes ties common.
pub fn dyadic_table(rng: &mut ChaCha8Rng, fuels: &[FuelType]) -> CarbonTable {
    CarbonTable::from_entries(fuels.iter().map(|f| (f.clone(), rng.gen_range(0..=12) as f64 / 1024.0))).unwrap()
}

/// Every integer dispatch vector `x` with `0 <= x[i] <= caps[i]` and
/// `sum(x) == served`.
pub fn integer_dispatches(caps: &[u32], served: u32) -> Vec<Vec<u32>> {
    fn go(caps: &[u32], left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        match caps.split_first() {
            None => {
                if left == 0 {
                    out.push(prefix.clone());
                }
            }
            Some((&cap, rest)) => {
                let rest_max: u32 = rest.iter().sum();
                for x in 0..=cap.min(left) {
                    if left - x <= rest_max {
                        prefix.push(x);
                        go(rest, left - x, prefix, out);
                        prefix.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    go(caps, served, &mut Vec::new(), &mut out);
    out
}

/// Random fleet of `hours` hours over the given fuels, caps uniform in
/// `[0, max_cap)`.
pub fn random_fleet(rng: &mut ChaCha8Rng, fuels: &[FuelType], hours: usize, max_cap: f64) -> Fleet {
    fleet(
        fuels
            .iter()
            .map(|f| (f.clone(), (0..hours).map(|_| rng.gen_range(0.0..max_cap)).collect()))
            .collect(),
    )
}

pub fn random_load(rng: &mut ChaCha8Rng, hours: usize, max: f64) -> HourlySeries {
    series((0..hours).map(|_| rng.gen_range(0.0..max)).collect())
}

/// Same as [`random_fleet`] with whole-MWh caps in `0..=max_cap`.
pub fn integer_fleet(rng: &mut ChaCha8Rng, fuels: &[FuelType], hours: usize, max_cap: u32) -> Fleet {
    fleet(
        fuels
            .iter()
            .map(|f| {
                (
                    f.clone(),
                    (0..hours).map(|_| rng.gen_range(0..=max_cap) as f64).collect(),
                )
            })
            .collect(),
    )
}

pub fn integer_load(rng: &mut ChaCha8Rng, hours: usize, max: u32) -> HourlySeries {
    series((0..hours).map(|_| rng.gen_range(0..=max) as f64).collect())
}

/// `|actual - expected| <= tol * |expected|`.
pub fn within_relative(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol * expected.abs()
}
