//! Named scenarios: ingest, build the fleet, dispatch with or without
//! storage, and summarize the year.

use std::collections::BTreeMap;
use std::path::PathBuf;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::dispatch::{dispatch_year, YearDispatch};
use crate::error::{Error, Result};
use crate::ingest::{self, GapMode};
use crate::storage::{dispatch_year_with_storage, size_storage, storage_utilization, StorageHour, StorageSpec};
use crate::types::{intensity_of, CarbonTable, Fleet, FuelType, HourlySeries};

#[derive(Debug, Clone, PartialEq)]
pub enum StorageChoice {
    /// Lossless, unconstrained reservoir sized to absorb all curtailment.
    Sized,
    Fixed(StorageSpec),
}

/// A fully resolved scenario: file paths are ready to open.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub load_source: PathBuf,
    pub baseline_mix_source: PathBuf,
    pub projects_source: Option<PathBuf>,
    pub profiles_source: Option<PathBuf>,
    pub storage: Option<StorageChoice>,
    pub carbon_table: CarbonTable,
    /// Intensity for fuels outside the table; defaults to the table's NGCC value.
    pub other_intensity: Option<f64>,
    pub mode: GapMode,
}

impl ScenarioConfig {
    /// Scenario with no added projects and no storage, default carbon table.
    pub fn baseline(name: impl Into<String>, load: impl Into<PathBuf>, fuel_mix: impl Into<PathBuf>) -> Self {
        ScenarioConfig {
            name: name.into(),
            load_source: load.into(),
            baseline_mix_source: fuel_mix.into(),
            projects_source: None,
            profiles_source: None,
            storage: None,
            carbon_table: CarbonTable::default(),
            other_intensity: None,
            mode: GapMode::Strict,
        }
    }

    pub fn input_files(&self) -> Vec<PathBuf> {
        let mut files = vec![self.load_source.clone(), self.baseline_mix_source.clone()];
        files.extend(self.projects_source.iter().cloned());
        files.extend(self.profiles_source.iter().cloned());
        files
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub hours: usize,
    pub total_load_mwh: f64,
    pub total_generation_mwh: f64,
    pub generation_mwh: BTreeMap<FuelType, f64>,
    /// Empty when nothing was generated.
    pub shares: BTreeMap<FuelType, f64>,
    /// Wind, solar and storage discharge over all generation.
    pub renewables_share: f64,
    pub annual_emissions_kg: f64,
    pub average_intensity_kg_per_kwh: f64,
    pub annual_curtailment_mwh: f64,
    /// Curtailment of the same fleet before storage was added.
    pub curtailment_without_storage_mwh: f64,
    pub unmet_energy_mwh: f64,
    /// `None` without storage or with an unbounded reservoir.
    pub storage_capacity_mwh: Option<f64>,
    pub peak_soc_mwh: Option<f64>,
    pub storage_utilization: Option<f64>,
}

/// Everything produced by one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub report: ScenarioReport,
    pub load: HourlySeries,
    /// Fuel columns for hourly output, storage included when enabled.
    pub fuels: Vec<FuelType>,
    pub dispatch: YearDispatch,
    pub storage: Option<Vec<StorageHour>>,
    pub warnings: Vec<String>,
}

/// Per-fuel share of annual generation. Storage discharge is its own slice.
pub fn generation_mix(year: &YearDispatch) -> Result<BTreeMap<FuelType, f64>> {
    let total = year.totals.total_generation();
    if total <= 0.0 {
        return Err(Error::ZeroGeneration);
    }
    Ok(year
        .totals
        .generation
        .iter()
        .map(|(f, mwh)| (f.clone(), mwh / total))
        .collect())
}

/// Like [`generation_mix`], but storage discharge is credited to wind and
/// solar in proportion to their own annual generation.
pub fn generation_mix_folded(year: &YearDispatch) -> Result<BTreeMap<FuelType, f64>> {
    Ok(fold_storage_shares(&generation_mix(year)?))
}

/// Moves the storage share onto wind and solar pro rata. Left unchanged
/// when neither wind nor solar has a share to weight by.
pub fn fold_storage_shares(shares: &BTreeMap<FuelType, f64>) -> BTreeMap<FuelType, f64> {
    let mut mix = shares.clone();
    let get = |f: &FuelType| shares.get(f).copied().unwrap_or(0.0);
    let vre = get(&FuelType::Wind) + get(&FuelType::Photovoltaic);
    if vre <= 0.0 {
        return mix;
    }
    if let Some(storage) = mix.remove(&FuelType::Storage) {
        for fuel in [FuelType::Wind, FuelType::Photovoltaic] {
            let weight = get(&fuel) / vre;
            if weight > 0.0 {
                *mix.entry(fuel).or_insert(0.0) += storage * weight;
            }
        }
    }
    mix
}

fn renewables_share(year: &YearDispatch) -> f64 {
    let total = year.totals.total_generation();
    if total <= 0.0 {
        return 0.0;
    }
    let renewable: f64 = year
        .totals
        .generation
        .iter()
        .filter(|(f, _)| f.is_variable_renewable() || **f == FuelType::Storage)
        .map(|(_, mwh)| mwh)
        .sum();
    renewable / total
}

fn build_report(
    name: &str,
    year: &YearDispatch,
    curtailment_without_storage: f64,
    storage: Option<(&StorageSpec, &[StorageHour])>,
) -> ScenarioReport {
    let totals = &year.totals;
    let total_generation = totals.total_generation();
    let (storage_capacity_mwh, peak_soc_mwh, utilization) = match storage {
        Some((spec, hours)) => (
            spec.energy_capacity.is_finite().then_some(spec.energy_capacity),
            Some(hours.iter().map(|s| s.soc_end).fold(spec.initial_soc, f64::max)),
            Some(storage_utilization(hours)),
        ),
        None => (None, None, None),
    };
    ScenarioReport {
        name: name.to_string(),
        hours: year.hours.len(),
        total_load_mwh: totals.load,
        total_generation_mwh: total_generation,
        generation_mwh: totals.generation.clone(),
        shares: generation_mix(year).unwrap_or_default(),
        renewables_share: renewables_share(year),
        annual_emissions_kg: totals.emissions,
        average_intensity_kg_per_kwh: intensity_of(totals.emissions, total_generation),
        annual_curtailment_mwh: totals.total_curtailment(),
        curtailment_without_storage_mwh: curtailment_without_storage,
        unmet_energy_mwh: totals.unmet,
        storage_capacity_mwh,
        peak_soc_mwh,
        storage_utilization: utilization,
    }
}

/// Runs ingest, fleet construction, dispatch and (optionally) storage for
/// one scenario. Errors carry the scenario name.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    run_inner(config).map_err(|e| Error::Scenario {
        name: config.name.clone(),
        source: Box::new(e),
    })
}

/// Inputs of a scenario after ingestion, ready to dispatch.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedScenario {
    pub load: HourlySeries,
    pub fleet: Fleet,
    /// Carbon table with entries added for any unlisted fuels.
    pub table: CarbonTable,
    pub warnings: Vec<String>,
}

/// Reads the scenario's files and builds its fleet and carbon table.
pub fn prepare_scenario(config: &ScenarioConfig) -> Result<PreparedScenario> {
    prepare_inner(config).map_err(|e| Error::Scenario {
        name: config.name.clone(),
        source: Box::new(e),
    })
}

fn prepare_inner(config: &ScenarioConfig) -> Result<PreparedScenario> {
    let mode = config.mode;
    let (load, mut warnings) = ingest::read_load(&config.load_source, mode)?;
    let mix = ingest::read_fuel_mix(&config.baseline_mix_source, mode)?;
    warnings.extend(mix.warnings);

    let future = match (&config.projects_source, &config.profiles_source) {
        (Some(projects), Some(profiles)) => {
            let all = ingest::read_projects(projects)?;
            let kept = ingest::filter_gis_projects(&all);
            for (fuel, mw) in ingest::capacity_by_fuel(&kept) {
                info!(
                    "{}: adding {mw} MW of {fuel} from {} of {} projects",
                    config.name,
                    kept.len(),
                    all.len()
                );
            }
            let profiles = ingest::read_profiles(profiles)?;
            ingest::build_future_renewables(&kept, &profiles)?
        }
        (None, None) => BTreeMap::new(),
        _ => return Err(Error::Config("projects and profiles must be given together".into())),
    };
    let fleet = ingest::build_fleet(&mix.series, &future)?;

    let mut table = config.carbon_table.clone();
    for fuel in fleet.fuels() {
        if let FuelType::Other(label) = fuel {
            if !table.contains(fuel) {
                let value = match config.other_intensity {
                    Some(v) => v,
                    None => table.intensity(&FuelType::NaturalGasCombinedCycle)?,
                };
                let msg = format!("fuel '{label}' has no carbon intensity; using {value} kgCO2/kWh");
                warn!("{}: {msg}", config.name);
                warnings.push(msg);
                table.set(fuel.clone(), value)?;
            }
        }
    }

    if !load.is_full_year() {
        let msg = format!("{} hours of data, not a full year", load.len());
        info!("{}: {msg}", config.name);
        warnings.push(msg);
    }
    Ok(PreparedScenario {
        load,
        fleet,
        table,
        warnings,
    })
}

fn run_inner(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let PreparedScenario {
        load,
        fleet,
        table,
        warnings,
    } = prepare_inner(config)?;

    let plain = dispatch_year(&load, &fleet, &table)?;
    let curtailment_without_storage = plain.totals.total_curtailment();

    let mut fuels: Vec<FuelType> = fleet.fuels().cloned().collect();
    let (dispatch, storage, report) = match &config.storage {
        None => {
            let report = build_report(&config.name, &plain, curtailment_without_storage, None);
            (plain, None, report)
        }
        Some(choice) => {
            let spec = match choice {
                StorageChoice::Sized => StorageSpec::with_capacity(size_storage(&load, &fleet, &table)?.capacity),
                StorageChoice::Fixed(spec) => *spec,
            };
            let (year, hours) = dispatch_year_with_storage(&load, &fleet, &table, &spec)?;
            let report = build_report(&config.name, &year, curtailment_without_storage, Some((&spec, &hours)));
            fuels.push(FuelType::Storage);
            fuels.sort();
            (year, Some(hours), report)
        }
    };

    Ok(ScenarioRun {
        report,
        load,
        fuels,
        dispatch,
        storage,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AnnualEmissions,
    AverageIntensity,
    AnnualCurtailment,
    RenewablesShare,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::AnnualEmissions,
        Metric::AverageIntensity,
        Metric::AnnualCurtailment,
        Metric::RenewablesShare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AnnualEmissions => "annual_emissions_kg",
            Metric::AverageIntensity => "average_intensity_kg_per_kwh",
            Metric::AnnualCurtailment => "annual_curtailment_mwh",
            Metric::RenewablesShare => "renewables_share",
        }
    }

    pub fn of(self, report: &ScenarioReport) -> f64 {
        match self {
            Metric::AnnualEmissions => report.annual_emissions_kg,
            Metric::AverageIntensity => report.average_intensity_kg_per_kwh,
            Metric::AnnualCurtailment => report.annual_curtailment_mwh,
            Metric::RenewablesShare => report.renewables_share,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: String,
    pub metric: Metric,
    pub reference: f64,
    pub value: f64,
    pub delta: f64,
    /// `(value - reference) / reference`; `None` when the reference is not positive.
    pub pct_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub reference: String,
    pub rows: Vec<ComparisonRow>,
}

/// Deltas of each scenario against `reports[reference]`, scenario-major.
pub fn compare_scenarios(reports: &[ScenarioReport], reference: usize) -> Result<ComparisonTable> {
    let base = reports.get(reference).ok_or(Error::EmptyComparison)?;
    let mut rows = Vec::with_capacity(reports.len() * Metric::ALL.len());
    for report in reports {
        for metric in Metric::ALL {
            let r = metric.of(base);
            let x = metric.of(report);
            rows.push(ComparisonRow {
                scenario: report.name.clone(),
                metric,
                reference: r,
                value: x,
                delta: x - r,
                pct_change: (r > 0.0).then(|| (x - r) / r),
            });
        }
    }
    Ok(ComparisonTable {
        reference: base.name.clone(),
        rows,
    })
}
