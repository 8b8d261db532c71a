//! Domain types shared by every stage of the pipeline: fuels, carbon
//! intensities, hourly series and fleets, plus the carbon merit order.
//!
//! Energy is always MWh (one hour at average MW), mass is kgCO₂, and carbon
//! intensities stay in kgCO₂/kWh as published. Only [`emissions_of`] and
//! its inverse [`intensity_of`] convert between MWh and kWh.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const KWH_PER_MWH: f64 = 1000.0;

pub const HOURS_PER_YEAR: usize = 8760;
pub const HOURS_PER_LEAP_YEAR: usize = 8784;

/// Generation resource, aggregated at fuel level.
///
/// Variant order is the fixed enumeration order used to break merit-order
/// ties, so do not reorder.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FuelType {
    Biomass,
    Coal,
    NaturalGasTurbine,
    NaturalGasCombinedCycle,
    Hydroelectric,
    Nuclear,
    Photovoltaic,
    Wind,
    /// Dispatchable pseudo-resource fed from curtailed wind and solar.
    Storage,
    /// Anything not covered above; label is lowercase, trimmed and non-empty.
    Other(String),
}

impl FuelType {
    pub const NAMED: [FuelType; 9] = [
        FuelType::Biomass,
        FuelType::Coal,
        FuelType::NaturalGasTurbine,
        FuelType::NaturalGasCombinedCycle,
        FuelType::Hydroelectric,
        FuelType::Nuclear,
        FuelType::Photovoltaic,
        FuelType::Wind,
        FuelType::Storage,
    ];

    /// Builds an `Other` fuel, normalizing the label. Labels that name a
    /// known fuel resolve to that fuel instead.
    pub fn other(label: &str) -> Result<FuelType> {
        label.parse()
    }

    pub fn is_fossil(&self) -> bool {
        matches!(
            self,
            FuelType::Coal | FuelType::NaturalGasTurbine | FuelType::NaturalGasCombinedCycle
        )
    }

    /// Wind and solar: the fuels whose surplus counts as curtailment.
    pub fn is_variable_renewable(&self) -> bool {
        matches!(self, FuelType::Wind | FuelType::Photovoltaic)
    }

    pub fn name(&self) -> &str {
        match self {
            FuelType::Biomass => "Biomass",
            FuelType::Coal => "Coal",
            FuelType::NaturalGasTurbine => "NaturalGasTurbine",
            FuelType::NaturalGasCombinedCycle => "NaturalGasCombinedCycle",
            FuelType::Hydroelectric => "Hydroelectric",
            FuelType::Nuclear => "Nuclear",
            FuelType::Photovoltaic => "Photovoltaic",
            FuelType::Wind => "Wind",
            FuelType::Storage => "Storage",
            FuelType::Other(label) => label,
        }
    }
}

impl fmt::Display for FuelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FuelType {
    type Err = Error;

    /// Case-insensitive; spaces, dashes and underscores are ignored when
    /// matching known names. ERCOT fuel-mix labels (`Gas`, `Gas-CC`, `Hydro`,
    /// `Solar`, `Power Storage`) are accepted as aliases.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(Error::InvalidFuel("empty fuel label".into()));
        }
        let key: String = trimmed
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        let fuel = match key.as_str() {
            "biomass" => FuelType::Biomass,
            "coal" | "coalandlignite" => FuelType::Coal,
            "naturalgasturbine" | "ngt" | "ngct" | "gas" | "gasturbine" | "gasct" => FuelType::NaturalGasTurbine,
            "naturalgascombinedcycle" | "ngcc" | "gascc" | "combinedcycle" => FuelType::NaturalGasCombinedCycle,
            "hydroelectric" | "hydro" => FuelType::Hydroelectric,
            "nuclear" => FuelType::Nuclear,
            "photovoltaic" | "pv" | "solar" => FuelType::Photovoltaic,
            "wind" => FuelType::Wind,
            "storage" | "powerstorage" => FuelType::Storage,
            _ => FuelType::Other(trimmed.to_lowercase()),
        };
        Ok(fuel)
    }
}

impl Serialize for FuelType {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for FuelType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Carbon intensity per fuel, kgCO₂/kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarbonTable {
    entries: BTreeMap<FuelType, f64>,
}

impl Default for CarbonTable {
    /// Life-cycle intensities for the ERCOT fuel classes.
    fn default() -> Self {
        let entries = [
            (FuelType::Biomass, 0.28),
            (FuelType::Coal, 0.92),
            (FuelType::NaturalGasTurbine, 0.55),
            (FuelType::NaturalGasCombinedCycle, 0.44),
            (FuelType::Hydroelectric, 0.024),
            (FuelType::Nuclear, 0.012),
            (FuelType::Photovoltaic, 0.026),
            (FuelType::Wind, 0.011),
        ]
        .into_iter()
        .collect();
        CarbonTable { entries }
    }
}

impl CarbonTable {
    pub fn empty() -> Self {
        CarbonTable {
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (FuelType, f64)>) -> Result<Self> {
        let mut table = CarbonTable::empty();
        for (fuel, value) in entries {
            table.set(fuel, value)?;
        }
        Ok(table)
    }

    pub fn set(&mut self, fuel: FuelType, intensity: f64) -> Result<()> {
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(Error::InvalidIntensity { fuel, value: intensity });
        }
        self.entries.insert(fuel, intensity);
        Ok(())
    }

    pub fn get(&self, fuel: &FuelType) -> Option<f64> {
        self.entries.get(fuel).copied()
    }

    pub fn intensity(&self, fuel: &FuelType) -> Result<f64> {
        self.get(fuel).ok_or_else(|| Error::MissingIntensity(fuel.clone()))
    }

    pub fn contains(&self, fuel: &FuelType) -> bool {
        self.entries.contains_key(fuel)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FuelType, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    /// Multiplies every intensity by `factor` (must be positive and finite).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        CarbonTable::from_entries(self.entries.iter().map(|(f, v)| (f.clone(), v * factor)))
    }
}

/// Orders `fuels` by ascending carbon intensity. Equal intensities keep the
/// enumeration order of [`FuelType`]; duplicates collapse.
pub fn merit_order<'a>(table: &CarbonTable, fuels: impl IntoIterator<Item = &'a FuelType>) -> Result<Vec<FuelType>> {
    let unique: BTreeSet<&FuelType> = fuels.into_iter().collect();
    let mut ranked = unique
        .into_iter()
        .map(|f| Ok((table.intensity(f)?, f.clone())))
        .collect::<Result<Vec<_>>>()?;
    // stable: ties stay in enumeration order
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ranked.into_iter().map(|(_, f)| f).collect())
}

/// Emissions in kgCO₂ of an energy dispatch given in MWh.
pub fn emissions_of(dispatch: &BTreeMap<FuelType, f64>, table: &CarbonTable) -> Result<f64> {
    let mut total = 0.0;
    for (fuel, &mwh) in dispatch {
        if !mwh.is_finite() || mwh < 0.0 {
            return Err(Error::InvalidValue {
                context: format!("dispatch of {fuel}"),
                value: mwh,
            });
        }
        total += mwh * KWH_PER_MWH * table.intensity(fuel)?;
    }
    Ok(total)
}

/// Average intensity in kgCO₂/kWh of `energy_mwh` that emitted `emissions_kg`;
/// zero when nothing was generated.
pub fn intensity_of(emissions_kg: f64, energy_mwh: f64) -> f64 {
    if energy_mwh > 0.0 {
        emissions_kg / (energy_mwh * KWH_PER_MWH)
    } else {
        0.0
    }
}

/// A run of hourly energy values in MWh, one per hour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourlySeries {
    label: String,
    values: Vec<f64>,
}

impl HourlySeries {
    /// Values must be finite and non-negative. Any length is accepted; use [`HourlySeries::is_full_year`] where a calendar year is
    /// required.
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if let Some((h, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue {
                context: format!("series '{label}' hour {h}"),
                value: v,
            });
        }
        Ok(HourlySeries { label, values })
    }

    /// Builds a year-length series, rejecting anything but 8760 or 8784 hours.
    pub fn year(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let series = HourlySeries::new(label, values)?;
        if !series.is_full_year() {
            return Err(Error::LengthMismatch {
                what: format!("series '{}'", series.label),
                expected: HOURS_PER_YEAR,
                found: series.len(),
            });
        }
        Ok(series)
    }

    pub fn zeros(label: impl Into<String>, len: usize) -> Result<Self> {
        HourlySeries::new(label, vec![0.0; len])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_full_year(&self) -> bool {
        matches!(self.len(), HOURS_PER_YEAR | HOURS_PER_LEAP_YEAR)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl std::ops::Index<usize> for HourlySeries {
    type Output = f64;

    fn index(&self, hour: usize) -> &f64 {
        &self.values[hour]
    }
}

/// Hourly dispatch caps per fuel plus the fuels whose surplus is curtailment.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    availability: BTreeMap<FuelType, HourlySeries>,
    curtailable: BTreeSet<FuelType>,
    hours: usize,
}

impl Fleet {
    pub fn new(availability: BTreeMap<FuelType, HourlySeries>, curtailable: BTreeSet<FuelType>) -> Result<Self> {
        if availability.contains_key(&FuelType::Storage) {
            return Err(Error::InvalidFuel(
                "Storage cannot appear as a fleet resource; configure it as scenario storage".into(),
            ));
        }
        let hours = availability.values().next().map_or(0, HourlySeries::len);
        for (fuel, series) in &availability {
            if series.len() != hours {
                return Err(Error::LengthMismatch {
                    what: format!("availability of {fuel}"),
                    expected: hours,
                    found: series.len(),
                });
            }
        }
        if let Some(stray) = curtailable.iter().find(|f| !availability.contains_key(f)) {
            return Err(Error::InvalidFuel(format!(
                "curtailable fuel {stray} has no availability series"
            )));
        }
        Ok(Fleet {
            availability,
            curtailable,
            hours,
        })
    }

    /// Fleet whose curtailable set is whichever of wind and solar are present.
    pub fn with_default_curtailable(availability: BTreeMap<FuelType, HourlySeries>) -> Result<Self> {
        let curtailable = availability
            .keys()
            .filter(|f| f.is_variable_renewable())
            .cloned()
            .collect();
        Fleet::new(availability, curtailable)
    }

    pub fn hours(&self) -> usize {
        self.hours
    }

    pub fn fuels(&self) -> impl Iterator<Item = &FuelType> {
        self.availability.keys()
    }

    pub fn availability(&self) -> &BTreeMap<FuelType, HourlySeries> {
        &self.availability
    }

    pub fn curtailable(&self) -> &BTreeSet<FuelType> {
        &self.curtailable
    }

    pub fn caps_at(&self, hour: usize) -> BTreeMap<FuelType, f64> {
        self.availability.iter().map(|(f, s)| (f.clone(), s[hour])).collect()
    }
}
