//! Scenario-set config file (TOML).
//!
//! ```toml
//! reference = "baseline"        # optional, defaults to the first scenario
//! mode = "strict"               # or "lenient"
//! other_intensity = 0.44        # optional, kgCO2/kWh for unlisted fuels
//!
//! [carbon_table]                # optional overrides of the default table
//! Coal = 0.95
//!
//! [[scenario]]
//! name = "future_sized"
//! load = "load.csv"
//! fuel_mix = "fuel_mix.csv"
//! projects = "projects.csv"
//! profiles = "profiles.csv"
//! storage = "sized"             # or a [scenario.storage] table
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ingest::GapMode;
use crate::scenario::{ScenarioConfig, StorageChoice};
use crate::storage::{DischargeIntensity, StorageSpec};
use crate::types::{CarbonTable, FuelType};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    reference: Option<String>,
    #[serde(default)]
    mode: GapMode,
    other_intensity: Option<f64>,
    #[serde(default)]
    carbon_table: BTreeMap<String, f64>,
    #[serde(rename = "scenario", default)]
    scenarios: Vec<RawScenario>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    load: PathBuf,
    fuel_mix: PathBuf,
    projects: Option<PathBuf>,
    profiles: Option<PathBuf>,
    storage: Option<RawStorage>,
    #[serde(default)]
    carbon_table: BTreeMap<String, f64>,
    other_intensity: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawStorage {
    Keyword(String),
    Spec(RawStorageSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStorageSpec {
    energy_capacity_mwh: Option<f64>,
    charge_power_mw: Option<f64>,
    discharge_power_mw: Option<f64>,
    round_trip_efficiency: Option<f64>,
    initial_soc_mwh: Option<f64>,
    discharge_intensity: Option<DischargeIntensity>,
}

impl RawStorageSpec {
    fn into_spec(self) -> StorageSpec {
        let d = StorageSpec::default();
        StorageSpec {
            energy_capacity: self.energy_capacity_mwh.unwrap_or(d.energy_capacity),
            charge_power: self.charge_power_mw.unwrap_or(d.charge_power),
            discharge_power: self.discharge_power_mw.unwrap_or(d.discharge_power),
            round_trip_efficiency: self.round_trip_efficiency.unwrap_or(d.round_trip_efficiency),
            initial_soc: self.initial_soc_mwh.unwrap_or(d.initial_soc),
            discharge_intensity: self.discharge_intensity.unwrap_or(d.discharge_intensity),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub path: PathBuf,
    pub reference: String,
    pub scenarios: Vec<ScenarioConfig>,
}

impl Config {
    pub fn reference_index(&self) -> usize {
        self.scenarios
            .iter()
            .position(|s| s.name == self.reference)
            .expect("reference validated at load")
    }

    pub fn set_mode(&mut self, mode: GapMode) {
        for s in &mut self.scenarios {
            s.mode = mode;
        }
    }
}

fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn apply_overrides(table: &mut CarbonTable, overrides: &BTreeMap<String, f64>) -> Result<()> {
    for (label, &value) in overrides {
        let fuel: FuelType = label.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        table.set(fuel, value).map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn check_intensity(value: Option<f64>) -> Result<()> {
    match value {
        Some(v) if !v.is_finite() || v < 0.0 => Err(Error::Config(format!(
            "other_intensity must be finite and non-negative, got {v}"
        ))),
        _ => Ok(()),
    }
}

/// Parses and validates a config document. `base_dir` anchors relative paths.
pub fn parse_config(text: &str, path: &Path) -> Result<Config> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or(Path::new(""));
    if raw.scenarios.is_empty() {
        return Err(Error::Config("no [[scenario]] entries".into()));
    }
    check_intensity(raw.other_intensity)?;
    let mut base_table = CarbonTable::default();
    apply_overrides(&mut base_table, &raw.carbon_table)?;

    let mut names = BTreeSet::new();
    let mut scenarios = Vec::with_capacity(raw.scenarios.len());
    for s in raw.scenarios {
        if !is_valid_name(&s.name) {
            return Err(Error::Config(format!(
                "scenario name '{}' must be non-empty ASCII letters, digits, '_', '-' or '.'",
                s.name
            )));
        }
        if !names.insert(s.name.clone()) {
            return Err(Error::Config(format!("duplicate scenario name '{}'", s.name)));
        }
        if s.projects.is_some() != s.profiles.is_some() {
            return Err(Error::Config(format!(
                "scenario '{}': projects and profiles must be given together",
                s.name
            )));
        }
        check_intensity(s.other_intensity)?;
        let mut table = base_table.clone();
        apply_overrides(&mut table, &s.carbon_table)?;
        let storage = match s.storage {
            None => None,
            Some(RawStorage::Keyword(k)) if k.eq_ignore_ascii_case("sized") => Some(StorageChoice::Sized),
            Some(RawStorage::Keyword(k)) if k.eq_ignore_ascii_case("none") => None,
            Some(RawStorage::Keyword(k)) => {
                return Err(Error::Config(format!(
                    "scenario '{}': storage must be \"sized\", \"none\" or a table, got \"{k}\"",
                    s.name
                )))
            }
            Some(RawStorage::Spec(spec)) => {
                let spec = spec.into_spec();
                spec.validate()
                    .map_err(|e| Error::Config(format!("scenario '{}': {e}", s.name)))?;
                Some(StorageChoice::Fixed(spec))
            }
        };
        let resolve = |p: &Path| base_dir.join(p);
        scenarios.push(ScenarioConfig {
            name: s.name,
            load_source: resolve(&s.load),
            baseline_mix_source: resolve(&s.fuel_mix),
            projects_source: s.projects.as_deref().map(resolve),
            profiles_source: s.profiles.as_deref().map(resolve),
            storage,
            carbon_table: table,
            other_intensity: s.other_intensity.or(raw.other_intensity),
            mode: raw.mode,
        });
    }

    let reference = match raw.reference {
        Some(r) if names.contains(&r) => r,
        Some(r) => return Err(Error::Config(format!("reference scenario '{r}' is not defined"))),
        None => scenarios[0].name.clone(),
    };

    Ok(Config {
        path: path.to_path_buf(),
        reference,
        scenarios,
    })
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}
