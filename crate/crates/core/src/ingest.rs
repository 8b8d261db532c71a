//! CSV ingestion: quarter-hour fuel mix, hourly load, interconnection
//! project lists and per-project capacity-factor profiles.
//!
//! Rows are positional. Hour 0 of the fuel mix lines up with `hour_index` 0
//! of the load file, and no daylight-saving adjustment is made.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDateTime, Timelike};
use log::warn;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Fleet, FuelType, HourlySeries};

const QUARTERS_PER_HOUR: usize = 4;

const TIMESTAMP_FORMATS: [&str; 6] = [
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%m/%d/%Y %H:%M:%S",
    "%m/%d/%Y %H:%M",
];

/// How to treat hours that do not have exactly four quarter-hour records,
/// and negative numbers in input files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMode {
    #[default]
    Strict,
    /// Average whatever is present, zero-fill missing hours, clamp negatives
    /// to zero. Every repair is recorded as a warning.
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuelMixRecord {
    pub timestamp: NaiveDateTime,
    pub fuel: FuelType,
    /// Energy over the interval, MWh.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedSeries {
    pub series: HourlySeries,
    pub first_hour: NaiveDateTime,
    pub warnings: Vec<String>,
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
}

fn hour_of(ts: NaiveDateTime) -> NaiveDateTime {
    ts.with_minute(0)
        .and_then(|t| t.with_second(0))
        .and_then(|t| t.with_nanosecond(0))
        .expect("zero minute/second is always valid")
}

fn fmt_ts(ts: NaiveDateTime) -> String {
    ts.format("%Y-%m-%d %H:%M").to_string()
}

/// Averages one fuel's quarter-hour records into hourly values.
///
/// Records must be strictly increasing in time. An hour's value is the
/// arithmetic mean of its records, summed in file order.
pub fn average_to_hourly(records: &[FuelMixRecord], mode: GapMode) -> Result<AveragedSeries> {
    let first = records.first().ok_or_else(|| Error::LengthMismatch {
        what: "fuel-mix records".into(),
        expected: QUARTERS_PER_HOUR,
        found: 0,
    })?;
    let fuel = first.fuel.clone();
    for pair in records.windows(2) {
        if pair[1].fuel != fuel {
            return Err(Error::InvalidFuel(format!(
                "mixed fuels {} and {} in one averaging pass",
                fuel, pair[1].fuel
            )));
        }
        if pair[1].timestamp <= pair[0].timestamp {
            return Err(Error::UnorderedTimestamps {
                fuel: fuel.to_string(),
                timestamp: fmt_ts(pair[1].timestamp),
            });
        }
    }

    let mut values = Vec::with_capacity(records.len() / QUARTERS_PER_HOUR + 1);
    let mut warnings = Vec::new();
    let first_hour = hour_of(first.timestamp);
    let mut expected_hour = first_hour;
    let mut i = 0;
    while i < records.len() {
        let hour = hour_of(records[i].timestamp);
        while expected_hour < hour {
            match mode {
                GapMode::Strict => {
                    return Err(Error::IncompleteHour {
                        timestamp: fmt_ts(expected_hour),
                        count: 0,
                    })
                }
                GapMode::Lenient => {
                    warnings.push(format!(
                        "{fuel}: no records for hour {}, filled with 0",
                        fmt_ts(expected_hour)
                    ));
                    values.push(0.0);
                }
            }
            expected_hour += chrono::Duration::hours(1);
        }
        let mut j = i;
        let mut sum = 0.0;
        while j < records.len() && hour_of(records[j].timestamp) == hour {
            sum += records[j].energy;
            j += 1;
        }
        let count = j - i;
        if count != QUARTERS_PER_HOUR {
            match mode {
                GapMode::Strict => {
                    return Err(Error::IncompleteHour {
                        timestamp: fmt_ts(hour),
                        count,
                    })
                }
                GapMode::Lenient => warnings.push(format!(
                    "{fuel}: hour {} has {count} of 4 records, averaged what was present",
                    fmt_ts(hour)
                )),
            }
        }
        values.push(sum / count as f64);
        expected_hour = hour + chrono::Duration::hours(1);
        i = j;
    }

    Ok(AveragedSeries {
        series: HourlySeries::new(fuel.to_string(), values)?,
        first_hour,
        warnings,
    })
}

/// Hourly availability per fuel, averaged from a quarter-hour fuel-mix file.
#[derive(Debug, Clone, PartialEq)]
pub struct FuelMix {
    pub series: BTreeMap<FuelType, HourlySeries>,
    pub first_hour: NaiveDateTime,
    pub warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct FuelMixRow {
    timestamp: String,
    fuel: String,
    mwh: String,
}

#[derive(Debug, Deserialize)]
struct LoadRow {
    hour_index: String,
    mwh: String,
}

#[derive(Debug, Deserialize)]
struct ProjectRow {
    project_id: String,
    fuel: String,
    capacity_mw: String,
    county: String,
    flags: String,
}

#[derive(Debug, Deserialize)]
struct ProfileRow {
    project_id: String,
    hour_index: String,
    capacity_factor: String,
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<(u64, T)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                let row = record.deserialize(Some(&headers)).map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: Some(line),
                    message: e.to_string(),
                })?;
                rows.push((line, row));
            }
            Err(e) => return Err(csv_error(path, e)),
        }
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: Some(line),
        message: message.into(),
    }
}

/// Parses a non-negative number. Lenient mode clamps negatives to zero and
/// records a warning; NaN and infinities are always rejected.
fn parse_energy(
    raw: &str,
    what: &str,
    path: &Path,
    line: u64,
    mode: GapMode,
    warnings: &mut Vec<String>,
) -> Result<f64> {
    let value: f64 = raw
        .parse()
        .map_err(|_| parse_err(path, line, format!("{what}: not a number: '{raw}'")))?;
    if !value.is_finite() {
        return Err(parse_err(path, line, format!("{what}: non-finite value '{raw}'")));
    }
    if value < 0.0 {
        match mode {
            GapMode::Strict => return Err(parse_err(path, line, format!("{what}: negative value {value}"))),
            GapMode::Lenient => {
                let msg = format!("{}:{line}: negative {what} {value} clamped to 0", path.display());
                warn!("{msg}");
                warnings.push(msg);
                return Ok(0.0);
            }
        }
    }
    Ok(value)
}

fn parse_index(raw: &str, path: &Path, line: u64) -> Result<usize> {
    raw.parse()
        .map_err(|_| parse_err(path, line, format!("hour_index: not an index: '{raw}'")))
}

/// Reads `fuel_mix.csv` (`timestamp,fuel,mwh`, quarter-hour rows) and averages
/// each fuel to hourly values. All fuels must cover the same hours.
pub fn read_fuel_mix(path: &Path, mode: GapMode) -> Result<FuelMix> {
    let rows: Vec<(u64, FuelMixRow)> = read_rows(path)?;
    let mut warnings = Vec::new();
    let mut by_fuel: BTreeMap<FuelType, Vec<(u64, FuelMixRecord)>> = BTreeMap::new();
    for (line, row) in rows {
        let timestamp = parse_timestamp(&row.timestamp)
            .ok_or_else(|| parse_err(path, line, format!("unparseable timestamp '{}'", row.timestamp)))?;
        let fuel: FuelType = row.fuel.parse().map_err(|e: Error| e.in_file(path, Some(line)))?;
        let energy = parse_energy(&row.mwh, "mwh", path, line, mode, &mut warnings)?;
        by_fuel.entry(fuel.clone()).or_default().push((
            line,
            FuelMixRecord {
                timestamp,
                fuel,
                energy,
            },
        ));
    }
    if by_fuel.is_empty() {
        return Err(parse_err(path, 1, "no fuel-mix records"));
    }

    let mut series = BTreeMap::new();
    let mut first_hour: Option<NaiveDateTime> = None;
    let mut hours: Option<usize> = None;
    for (fuel, entries) in by_fuel {
        let records: Vec<FuelMixRecord> = entries.iter().map(|(_, r)| r.clone()).collect();
        let averaged = average_to_hourly(&records, mode).map_err(|e| {
            let line = match &e {
                Error::IncompleteHour { timestamp, .. } | Error::UnorderedTimestamps { timestamp, .. } => entries
                    .iter()
                    .find(|(_, r)| fmt_ts(hour_of(r.timestamp)) == *timestamp || fmt_ts(r.timestamp) == *timestamp)
                    .map(|(l, _)| *l),
                _ => None,
            };
            e.in_file(path, line)
        })?;
        for w in &averaged.warnings {
            warn!("{}: {w}", path.display());
        }
        warnings.extend(averaged.warnings.iter().map(|w| format!("{}: {w}", path.display())));
        match first_hour {
            None => first_hour = Some(averaged.first_hour),
            Some(h) if h != averaged.first_hour => {
                return Err(parse_err(
                    path,
                    entries[0].0,
                    format!(
                        "{fuel} starts at {} but other fuels start at {}",
                        fmt_ts(averaged.first_hour),
                        fmt_ts(h)
                    ),
                ))
            }
            Some(_) => {}
        }
        let len = averaged.series.len();
        match hours {
            None => hours = Some(len),
            Some(n) if n != len => {
                return Err(Error::LengthMismatch {
                    what: format!("fuel-mix hours of {fuel}"),
                    expected: n,
                    found: len,
                }
                .in_file(path, None))
            }
            Some(_) => {}
        }
        series.insert(fuel, averaged.series);
    }

    Ok(FuelMix {
        series,
        first_hour: first_hour.expect("at least one fuel"),
        warnings,
    })
}

/// Reads `load.csv` (`hour_index,mwh`); indices must run 0, 1, 2, ... in order.
pub fn read_load(path: &Path, mode: GapMode) -> Result<(HourlySeries, Vec<String>)> {
    let rows: Vec<(u64, LoadRow)> = read_rows(path)?;
    let mut warnings = Vec::new();
    let mut values = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let idx = parse_index(&row.hour_index, path, line)?;
        if idx != values.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected hour_index {}, found {idx}", values.len()),
            ));
        }
        values.push(parse_energy(&row.mwh, "mwh", path, line, mode, &mut warnings)?);
    }
    if values.is_empty() {
        return Err(parse_err(path, 1, "no load rows"));
    }
    let series = HourlySeries::new("load", values).map_err(|e| e.in_file(path, None))?;
    Ok((series, warnings))
}

/// Interconnection-queue milestones carried by a project.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StatusFlag {
    SecurityScreeningComplete,
    InterconnectStudyComplete,
    FullInterconnectSurveyInProgress,
    InterconnectionAgreementComplete,
}

impl FromStr for StatusFlag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "securityscreeningcomplete" => Ok(StatusFlag::SecurityScreeningComplete),
            "interconnectstudycomplete" => Ok(StatusFlag::InterconnectStudyComplete),
            "fullinterconnectsurveyinprogress" => Ok(StatusFlag::FullInterconnectSurveyInProgress),
            "interconnectionagreementcomplete" => Ok(StatusFlag::InterconnectionAgreementComplete),
            _ => Err(Error::InvalidProject {
                id: String::new(),
                reason: format!("unknown status flag '{}'", s.trim()),
            }),
        }
    }
}

impl fmt::Display for StatusFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A wind or solar project from the interconnection status report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectRecord {
    pub project_id: String,
    pub fuel: FuelType,
    pub capacity_mw: f64,
    pub county: String,
    pub status_flags: BTreeSet<StatusFlag>,
}

impl ProjectRecord {
    pub fn new(
        project_id: impl Into<String>,
        fuel: FuelType,
        capacity_mw: f64,
        county: impl Into<String>,
        status_flags: impl IntoIterator<Item = StatusFlag>,
    ) -> Result<Self> {
        let project_id = project_id.into();
        if !fuel.is_variable_renewable() {
            return Err(Error::InvalidProject {
                id: project_id,
                reason: format!("fuel must be Wind or Photovoltaic, got {fuel}"),
            });
        }
        if !capacity_mw.is_finite() || capacity_mw <= 0.0 {
            return Err(Error::InvalidProject {
                id: project_id,
                reason: format!("capacity_mw must be positive, got {capacity_mw}"),
            });
        }
        Ok(ProjectRecord {
            project_id,
            fuel,
            capacity_mw,
            county: county.into(),
            status_flags: status_flags.into_iter().collect(),
        })
    }

    /// Screening plus a completed interconnect study, or screening plus a
    /// full study in progress and a signed interconnection agreement.
    pub fn is_likely_to_complete(&self) -> bool {
        use StatusFlag::*;
        let has = |f| self.status_flags.contains(&f);
        (has(SecurityScreeningComplete) && has(InterconnectStudyComplete))
            || (has(SecurityScreeningComplete)
                && has(FullInterconnectSurveyInProgress)
                && has(InterconnectionAgreementComplete))
    }
}

/// Keeps projects far enough through the interconnection process to be
/// counted as future capacity. Input order is preserved.
pub fn filter_gis_projects(projects: &[ProjectRecord]) -> Vec<ProjectRecord> {
    projects.iter().filter(|p| p.is_likely_to_complete()).cloned().collect()
}

/// Nameplate MW per fuel.
pub fn capacity_by_fuel(projects: &[ProjectRecord]) -> BTreeMap<FuelType, f64> {
    let mut totals = BTreeMap::new();
    for p in projects {
        *totals.entry(p.fuel.clone()).or_insert(0.0) += p.capacity_mw;
    }
    totals
}

/// Reads `projects.csv` (`project_id,fuel,capacity_mw,county,flags`), flags
/// being a `|`-separated list of status tokens.
pub fn read_projects(path: &Path) -> Result<Vec<ProjectRecord>> {
    let rows: Vec<(u64, ProjectRow)> = read_rows(path)?;
    let mut seen = BTreeSet::new();
    rows.into_iter()
        .map(|(line, row)| {
            let fuel: FuelType = row.fuel.parse().map_err(|e: Error| e.in_file(path, Some(line)))?;
            let capacity: f64 = row
                .capacity_mw
                .parse()
                .map_err(|_| parse_err(path, line, format!("capacity_mw: not a number: '{}'", row.capacity_mw)))?;
            let flags = row
                .flags
                .split('|')
                .filter(|t| !t.trim().is_empty())
                .map(StatusFlag::from_str)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.in_file(path, Some(line)))?;
            if !seen.insert(row.project_id.clone()) {
                return Err(parse_err(
                    path,
                    line,
                    format!("duplicate project_id '{}'", row.project_id),
                ));
            }
            ProjectRecord::new(row.project_id, fuel, capacity, row.county, flags)
                .map_err(|e| e.in_file(path, Some(line)))
        })
        .collect()
}

/// Hourly capacity factors of one project, each within [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectProfile {
    pub project_id: String,
    pub normalized_output: HourlySeries,
}

impl ProjectProfile {
    pub fn new(project_id: impl Into<String>, capacity_factors: Vec<f64>) -> Result<Self> {
        let project_id = project_id.into();
        if let Some((h, &cf)) = capacity_factors
            .iter()
            .enumerate()
            .find(|(_, cf)| !(0.0..=1.0).contains(*cf))
        {
            return Err(Error::InvalidValue {
                context: format!("capacity factor of {project_id} at hour {h}"),
                value: cf,
            });
        }
        let normalized_output = HourlySeries::new(format!("profile {project_id}"), capacity_factors)?;
        Ok(ProjectProfile {
            project_id,
            normalized_output,
        })
    }
}

/// Reads `profiles.csv` (`project_id,hour_index,capacity_factor`). Rows of
/// different projects may interleave, but each project's hour indices must
/// run 0, 1, 2, ... in order.
pub fn read_profiles(path: &Path) -> Result<BTreeMap<String, ProjectProfile>> {
    let rows: Vec<(u64, ProfileRow)> = read_rows(path)?;
    let mut raw: BTreeMap<String, (u64, Vec<f64>)> = BTreeMap::new();
    for (line, row) in rows {
        let idx = parse_index(&row.hour_index, path, line)?;
        let cf: f64 = row.capacity_factor.parse().map_err(|_| {
            parse_err(
                path,
                line,
                format!("capacity_factor: not a number: '{}'", row.capacity_factor),
            )
        })?;
        if !(0.0..=1.0).contains(&cf) {
            return Err(parse_err(path, line, format!("capacity_factor {cf} outside [0, 1]")));
        }
        let entry = raw.entry(row.project_id.clone()).or_insert((line, Vec::new()));
        if idx != entry.1.len() {
            return Err(parse_err(
                path,
                line,
                format!(
                    "project {}: expected hour_index {}, found {idx}",
                    row.project_id,
                    entry.1.len()
                ),
            ));
        }
        entry.1.push(cf);
    }
    raw.into_iter()
        .map(|(id, (line, values))| {
            let profile = ProjectProfile::new(id.clone(), values).map_err(|e| e.in_file(path, Some(line)))?;
            Ok((id, profile))
        })
        .collect()
}

/// Hourly wind and solar energy from added projects: per fuel and hour,
/// the sum of nameplate MW times that hour's capacity factor.
pub fn build_future_renewables(
    projects: &[ProjectRecord],
    profiles: &BTreeMap<String, ProjectProfile>,
) -> Result<BTreeMap<FuelType, HourlySeries>> {
    let mut sums: BTreeMap<FuelType, Vec<f64>> = BTreeMap::new();
    let mut hours: Option<usize> = None;
    for project in projects {
        let profile = profiles
            .get(&project.project_id)
            .ok_or_else(|| Error::MissingProfile(project.project_id.clone()))?;
        let cf = profile.normalized_output.values();
        let n = *hours.get_or_insert(cf.len());
        if cf.len() != n {
            return Err(Error::LengthMismatch {
                what: format!("profile of {}", project.project_id),
                expected: n,
                found: cf.len(),
            });
        }
        let acc = sums.entry(project.fuel.clone()).or_insert_with(|| vec![0.0; n]);
        for (slot, &f) in acc.iter_mut().zip(cf) {
            *slot += project.capacity_mw * f;
        }
    }
    sums.into_iter()
        .map(|(fuel, values)| {
            let label = format!("added {fuel}");
            Ok((fuel, HourlySeries::new(label, values)?))
        })
        .collect()
}

/// Fleet caps: baseline output for every fuel, with added wind and solar
/// stacked on top of the baseline wind and solar.
pub fn build_fleet(
    baseline_mix: &BTreeMap<FuelType, HourlySeries>,
    future_renewables: &BTreeMap<FuelType, HourlySeries>,
) -> Result<Fleet> {
    let hours = baseline_mix
        .values()
        .chain(future_renewables.values())
        .next()
        .map_or(0, HourlySeries::len);
    for (fuel, s) in baseline_mix.iter().chain(future_renewables) {
        if s.len() != hours {
            return Err(Error::LengthMismatch {
                what: format!("series for {fuel}"),
                expected: hours,
                found: s.len(),
            });
        }
    }
    let mut availability = baseline_mix.clone();
    for (fuel, added) in future_renewables {
        if !fuel.is_variable_renewable() {
            return Err(Error::InvalidFuel(format!(
                "only wind and solar can be added as future capacity, got {fuel}"
            )));
        }
        let combined = match baseline_mix.get(fuel) {
            Some(base) => base.values().iter().zip(added.values()).map(|(b, a)| b + a).collect(),
            None => added.values().to_vec(),
        };
        availability.insert(fuel.clone(), HourlySeries::new(fuel.to_string(), combined)?);
    }
    Fleet::with_default_curtailable(availability)
}
