//! Re-dispatch with a storage reservoir charged only from curtailed wind
//! and solar and discharged ahead of fossil generation, plus the sizing
//! rule that absorbs every curtailed MWh.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dispatch::{check_lengths, dispatch_in_order, YearDispatch};
use crate::error::{Error, Result};
use crate::types::{merit_order, CarbonTable, Fleet, FuelType, HourlySeries};

/// Carbon intensity assigned to energy discharged from storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DischargeIntensity {
    /// Discharge is carbon-free; the charged energy was surplus anyway.
    #[default]
    Zero,
    /// Energy-weighted mean intensity of everything charged so far.
    ChargedAverage,
}

/// Reservoir parameters. Infinite values mean "unbounded".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageSpec {
    /// MWh
    pub energy_capacity: f64,
    /// MWh drawn from curtailment per hour.
    pub charge_power: f64,
    /// MWh delivered per hour.
    pub discharge_power: f64,
    /// Round trip, split evenly as `sqrt` on each leg.
    pub round_trip_efficiency: f64,
    /// MWh
    pub initial_soc: f64,
    pub discharge_intensity: DischargeIntensity,
}

impl Default for StorageSpec {
    fn default() -> Self {
        StorageSpec {
            energy_capacity: f64::INFINITY,
            charge_power: f64::INFINITY,
            discharge_power: f64::INFINITY,
            round_trip_efficiency: 1.0,
            initial_soc: 0.0,
            discharge_intensity: DischargeIntensity::Zero,
        }
    }
}

impl StorageSpec {
    /// Lossless, power-unconstrained reservoir of the given size.
    pub fn with_capacity(energy_capacity: f64) -> Self {
        StorageSpec {
            energy_capacity,
            ..StorageSpec::default()
        }
    }

    pub fn unbounded() -> Self {
        StorageSpec::default()
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = |v: f64| !v.is_nan() && v >= 0.0;
        if !non_negative(self.energy_capacity) {
            return Err(Error::InvalidSpec(format!(
                "energy capacity must be >= 0, got {}",
                self.energy_capacity
            )));
        }
        if !non_negative(self.charge_power) || !non_negative(self.discharge_power) {
            return Err(Error::InvalidSpec(format!(
                "power limits must be >= 0, got charge {} / discharge {}",
                self.charge_power, self.discharge_power
            )));
        }
        let eff = self.round_trip_efficiency;
        if !(eff > 0.0 && eff <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "round-trip efficiency must be in (0, 1], got {eff}"
            )));
        }
        if !self.initial_soc.is_finite() || self.initial_soc < 0.0 || self.initial_soc > self.energy_capacity {
            return Err(Error::InvalidSpec(format!(
                "initial SOC {} outside [0, {}]",
                self.initial_soc, self.energy_capacity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageHour {
    pub charged: f64,
    pub discharged: f64,
    pub soc_end: f64,
}

/// Merit order with storage placed just ahead of the cheapest fossil fuel,
/// or last if there is no fossil fuel.
pub fn merit_order_with_storage(table: &CarbonTable, fuels: &[FuelType]) -> Result<Vec<FuelType>> {
    let mut order = merit_order(table, fuels.iter().filter(|f| **f != FuelType::Storage))?;
    let at = order.iter().position(FuelType::is_fossil).unwrap_or(order.len());
    order.insert(at, FuelType::Storage);
    Ok(order)
}

/// Runs the year hour by hour with a state-of-charge reservoir.
///
/// Each hour: storage offers `min(soc * sqrt(eff), discharge_power)` at its
/// merit-order slot; if it did not discharge, leftover wind and solar charges
/// it up to the power and headroom limits and the charged energy leaves the
/// reported curtailment (pro rata across fuels). The returned dispatch
/// reports post-storage curtailment and emissions.
pub fn dispatch_year_with_storage(
    load: &HourlySeries,
    fleet: &Fleet,
    table: &CarbonTable,
    spec: &StorageSpec,
) -> Result<(YearDispatch, Vec<StorageHour>)> {
    check_lengths(load, fleet)?;
    spec.validate()?;

    let fuels: Vec<FuelType> = fleet.fuels().cloned().collect();
    let plain_order = merit_order(table, &fuels)?;
    let storage_order = merit_order_with_storage(table, &fuels)?;
    let leg = spec.round_trip_efficiency.sqrt();

    let mut table = table.clone();
    table.set(FuelType::Storage, 0.0)?;
    let mut charged_energy = 0.0;
    let mut charged_weighted_intensity = 0.0;

    let mut soc = spec.initial_soc;
    let mut hours = Vec::with_capacity(load.len());
    let mut storage = Vec::with_capacity(load.len());
    for h in 0..load.len() {
        let mut caps = fleet.caps_at(h);
        let deliverable = (soc * leg).min(spec.discharge_power);
        let order = if deliverable > 0.0 {
            caps.insert(FuelType::Storage, deliverable);
            if spec.discharge_intensity == DischargeIntensity::ChargedAverage {
                let avg = if charged_energy > 0.0 {
                    charged_weighted_intensity / charged_energy
                } else {
                    0.0
                };
                table.set(FuelType::Storage, avg)?;
            }
            &storage_order
        } else {
            &plain_order
        };

        let mut hour = dispatch_in_order(h, load[h], &caps, order, &table, fleet.curtailable())?;
        let discharged = hour.dispatched.get(&FuelType::Storage).copied().unwrap_or(0.0);
        if discharged > 0.0 {
            soc = (soc - discharged / leg).max(0.0);
        }

        let mut charged = 0.0;
        if discharged == 0.0 {
            let spill = hour.curtailment();
            let headroom = if spec.energy_capacity.is_finite() {
                ((spec.energy_capacity - soc) / leg).max(0.0)
            } else {
                f64::INFINITY
            };
            charged = spill.min(spec.charge_power).min(headroom);
            if charged > 0.0 {
                let taken = take_from_curtailment(&mut hour.curtailed, spill, charged);
                for (fuel, mwh) in &taken {
                    charged_energy += mwh;
                    charged_weighted_intensity += mwh * table.intensity(fuel)?;
                }
                soc = (soc + charged * leg).min(spec.energy_capacity);
            }
        }

        storage.push(StorageHour {
            charged,
            discharged,
            soc_end: soc,
        });
        hours.push(hour);
    }

    Ok((YearDispatch::new(hours, fleet.curtailable()), storage))
}

/// Removes `amount` (<= `total`) from the curtailment map pro rata and
/// returns how much came from each fuel.
fn take_from_curtailment(curtailed: &mut BTreeMap<FuelType, f64>, total: f64, amount: f64) -> BTreeMap<FuelType, f64> {
    if amount >= total {
        return std::mem::take(curtailed);
    }
    let keep = (total - amount) / total;
    let mut taken = BTreeMap::new();
    for (fuel, mwh) in curtailed.iter_mut() {
        let left = *mwh * keep;
        taken.insert(fuel.clone(), *mwh - left);
        *mwh = left;
    }
    curtailed.retain(|_, v| *v > 0.0);
    taken
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageSizing {
    /// MWh
    pub capacity: f64,
    /// First hour at which the state of charge peaks; `None` when storage
    /// never charges.
    pub peak_hour: Option<usize>,
}

/// Smallest lossless reservoir that absorbs all curtailment: the peak state
/// of charge of an unbounded, 100 %-efficient reservoir starting empty.
pub fn size_storage(load: &HourlySeries, fleet: &Fleet, table: &CarbonTable) -> Result<StorageSizing> {
    let (_, hours) = dispatch_year_with_storage(load, fleet, table, &StorageSpec::unbounded())?;
    let mut sizing = StorageSizing {
        capacity: 0.0,
        peak_hour: None,
    };
    for (h, s) in hours.iter().enumerate() {
        if s.soc_end > sizing.capacity {
            sizing = StorageSizing {
                capacity: s.soc_end,
                peak_hour: Some(h),
            };
        }
    }
    Ok(sizing)
}

/// Share of hours in which storage discharged.
pub fn storage_utilization(hours: &[StorageHour]) -> f64 {
    if hours.is_empty() {
        return 0.0;
    }
    let used = hours.iter().filter(|s| s.discharged > 0.0).count();
    used as f64 / hours.len() as f64
}
