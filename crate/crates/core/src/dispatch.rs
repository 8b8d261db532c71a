//! Storage-free merit-order dispatch: each hour's load is met from the
//! lowest-carbon fuels first, and leftover wind and solar is curtailment.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{emissions_of, intensity_of, merit_order, CarbonTable, Fleet, FuelType, HourlySeries};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourDispatch {
    pub hour: usize,
    pub load: f64,
    /// MWh per fuel. Every fuel with a cap this hour appears, zero or not.
    pub dispatched: BTreeMap<FuelType, f64>,
    pub unmet: f64,
    /// Undispatched curtailable energy, positive entries only.
    pub curtailed: BTreeMap<FuelType, f64>,
    /// kgCO₂
    pub emissions: f64,
    /// kgCO₂/kWh of delivered energy.
    pub intensity: f64,
}

impl HourDispatch {
    pub fn generation(&self) -> f64 {
        self.dispatched.values().sum()
    }

    pub fn curtailment(&self) -> f64 {
        self.curtailed.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearTotals {
    pub load: f64,
    pub generation: BTreeMap<FuelType, f64>,
    /// One entry per curtailable fuel.
    pub curtailment: BTreeMap<FuelType, f64>,
    pub unmet: f64,
    pub emissions: f64,
}

impl YearTotals {
    pub fn from_hours(hours: &[HourDispatch], curtailable: &BTreeSet<FuelType>) -> Self {
        let mut totals = YearTotals {
            load: 0.0,
            generation: BTreeMap::new(),
            curtailment: curtailable.iter().map(|f| (f.clone(), 0.0)).collect(),
            unmet: 0.0,
            emissions: 0.0,
        };
        for h in hours {
            totals.load += h.load;
            totals.unmet += h.unmet;
            totals.emissions += h.emissions;
            for (fuel, mwh) in &h.dispatched {
                *totals.generation.entry(fuel.clone()).or_insert(0.0) += mwh;
            }
            for (fuel, mwh) in &h.curtailed {
                *totals.curtailment.entry(fuel.clone()).or_insert(0.0) += mwh;
            }
        }
        totals
    }

    pub fn total_generation(&self) -> f64 {
        self.generation.values().sum()
    }

    pub fn total_curtailment(&self) -> f64 {
        self.curtailment.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearDispatch {
    pub hours: Vec<HourDispatch>,
    pub totals: YearTotals,
}

impl YearDispatch {
    pub fn new(hours: Vec<HourDispatch>, curtailable: &BTreeSet<FuelType>) -> Self {
        let totals = YearTotals::from_hours(&hours, curtailable);
        YearDispatch { hours, totals }
    }
}

fn check_energy(value: f64, what: impl FnOnce() -> String) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidValue { context: what(), value })
    }
}

/// Walks `order`, giving each fuel `min(cap, remaining load)`. Fuels in
/// `order` without a cap are skipped; emissions use `table`.
pub(crate) fn dispatch_in_order(
    hour: usize,
    load: f64,
    caps: &BTreeMap<FuelType, f64>,
    order: &[FuelType],
    table: &CarbonTable,
    curtailable: &BTreeSet<FuelType>,
) -> Result<HourDispatch> {
    check_energy(load, || format!("load at hour {hour}"))?;
    let mut remaining = load;
    let mut dispatched = BTreeMap::new();
    for fuel in order {
        let Some(&cap) = caps.get(fuel) else { continue };
        check_energy(cap, || format!("cap of {fuel} at hour {hour}"))?;
        let take = cap.min(remaining);
        remaining -= take;
        dispatched.insert(fuel.clone(), take);
    }

    let mut curtailed = BTreeMap::new();
    for fuel in curtailable {
        if let (Some(cap), Some(used)) = (caps.get(fuel), dispatched.get(fuel)) {
            let spill = cap - used;
            if spill > 0.0 {
                curtailed.insert(fuel.clone(), spill);
            }
        }
    }

    let emissions = emissions_of(&dispatched, table)?;
    let generation: f64 = dispatched.values().sum();
    Ok(HourDispatch {
        hour,
        load,
        dispatched,
        unmet: remaining,
        curtailed,
        emissions,
        intensity: intensity_of(emissions, generation),
    })
}

/// Meets one hour's load from the cheapest-carbon caps first.
///
/// Shortfall is reported as `unmet`. Only fuels in `curtailable` record
/// curtailment; clipped nuclear or hydro simply goes undispatched.
pub fn dispatch_hour(
    load: f64,
    caps: &BTreeMap<FuelType, f64>,
    table: &CarbonTable,
    curtailable: &BTreeSet<FuelType>,
) -> Result<HourDispatch> {
    let order = merit_order(table, caps.keys())?;
    dispatch_in_order(0, load, caps, &order, table, curtailable)
}

pub(crate) fn check_lengths(load: &HourlySeries, fleet: &Fleet) -> Result<()> {
    if !fleet.availability().is_empty() && load.len() != fleet.hours() {
        return Err(Error::LengthMismatch {
            what: "load vs fleet availability".into(),
            expected: fleet.hours(),
            found: load.len(),
        });
    }
    Ok(())
}

/// Hour-by-hour dispatch of a whole load series against a fleet.
pub fn dispatch_year(load: &HourlySeries, fleet: &Fleet, table: &CarbonTable) -> Result<YearDispatch> {
    check_lengths(load, fleet)?;
    let order = merit_order(table, fleet.fuels())?;
    let hours = (0..load.len())
        .map(|h| dispatch_in_order(h, load[h], &fleet.caps_at(h), &order, table, fleet.curtailable()))
        .collect::<Result<Vec<_>>>()?;
    Ok(YearDispatch::new(hours, fleet.curtailable()))
}

/// Total curtailed energy per hour.
pub fn curtailment_series(result: &YearDispatch) -> HourlySeries {
    let values = result.hours.iter().map(HourDispatch::curtailment).collect();
    HourlySeries::new("curtailment", values).expect("curtailment is finite and non-negative")
}
