//! Report and plot-data serialization. Every CSV is UTF-8, comma separated,
//! LF terminated, with `.` decimals and shortest round-trip float formatting.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{fold_storage_shares, ComparisonTable, ScenarioReport, ScenarioRun};

pub const REPORT_FILE: &str = "report.json";
pub const HOURLY_FILE: &str = "hourly.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const MIX_FILE: &str = "mix.csv";
pub const INTENSITY_FILE: &str = "intensity.csv";

/// Shortest representation that parses back to the same `f64`, never in
/// exponent form, with negative zero printed as `0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("writing to memory cannot fail")
}

fn write_row<I, S>(w: &mut csv::Writer<Vec<u8>>, fields: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).expect("writing to memory cannot fail");
}

/// `hour,load_mwh,<fuel>_mwh...,unmet_mwh,curtailment_mwh,charged_mwh,soc_mwh,emissions_kg,intensity_kg_per_kwh`
pub fn hourly_csv(run: &ScenarioRun) -> Vec<u8> {
    let mut w = csv_writer();
    let mut header = vec!["hour".to_string(), "load_mwh".to_string()];
    header.extend(run.fuels.iter().map(|f| format!("{f}_mwh")));
    header.extend(
        [
            "unmet_mwh",
            "curtailment_mwh",
            "charged_mwh",
            "soc_mwh",
            "emissions_kg",
            "intensity_kg_per_kwh",
        ]
        .map(String::from),
    );
    write_row(&mut w, &header);

    for (i, hour) in run.dispatch.hours.iter().enumerate() {
        let (charged, soc) = run
            .storage
            .as_ref()
            .map_or((0.0, 0.0), |s| (s[i].charged, s[i].soc_end));
        let mut row = vec![hour.hour.to_string(), fmt_num(hour.load)];
        row.extend(
            run.fuels
                .iter()
                .map(|f| fmt_num(hour.dispatched.get(f).copied().unwrap_or(0.0))),
        );
        row.extend([
            fmt_num(hour.unmet),
            fmt_num(hour.curtailment()),
            fmt_num(charged),
            fmt_num(soc),
            fmt_num(hour.emissions),
            fmt_num(hour.intensity),
        ]);
        write_row(&mut w, &row);
    }
    finish(w)
}

pub fn report_json(report: &ScenarioReport) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

/// `scenario,metric,reference,value,delta,pct_change`; undefined percent
/// changes are left empty.
pub fn comparison_csv(table: &ComparisonTable) -> Vec<u8> {
    let mut w = csv_writer();
    write_row(
        &mut w,
        ["scenario", "metric", "reference", "value", "delta", "pct_change"],
    );
    for row in &table.rows {
        write_row(
            &mut w,
            [
                row.scenario.clone(),
                row.metric.name().to_string(),
                fmt_num(row.reference),
                fmt_num(row.value),
                fmt_num(row.delta),
                row.pct_change.map(fmt_num).unwrap_or_default(),
            ],
        );
    }
    finish(w)
}

/// `scenario,fuel,share`. With `fold_storage`, storage discharge is
/// credited to wind and solar instead of getting its own row.
pub fn mix_csv(reports: &[ScenarioReport], fold_storage: bool) -> Vec<u8> {
    let mut w = csv_writer();
    write_row(&mut w, ["scenario", "fuel", "share"]);
    for r in reports {
        let shares = if fold_storage {
            fold_storage_shares(&r.shares)
        } else {
            r.shares.clone()
        };
        for (fuel, share) in &shares {
            write_row(&mut w, [r.name.clone(), fuel.to_string(), fmt_num(*share)]);
        }
    }
    finish(w)
}

/// `scenario,intensity_kg_per_kwh`
pub fn intensity_csv(reports: &[ScenarioReport]) -> Vec<u8> {
    let mut w = csv_writer();
    write_row(&mut w, ["scenario", "intensity_kg_per_kwh"]);
    for r in reports {
        write_row(&mut w, [r.name.clone(), fmt_num(r.average_intensity_kg_per_kwh)]);
    }
    finish(w)
}

/// Provenance of a run. Only `duration_secs` varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: PathBuf,
    pub reference: String,
    pub scenarios: Vec<String>,
    /// SHA-256 of every input file read, keyed by path.
    pub inputs: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub duration_secs: f64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn scenario_dir(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

/// Writes `<out>/<name>/report.json` and `<out>/<name>/hourly.csv`.
pub fn write_scenario(out: &Path, run: &ScenarioRun) -> Result<()> {
    let dir = scenario_dir(out, &run.report.name);
    write_atomic(&dir.join(REPORT_FILE), &report_json(&run.report))?;
    write_atomic(&dir.join(HOURLY_FILE), &hourly_csv(run))
}

pub fn read_report(path: &Path) -> Result<ScenarioReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: Some(e.line() as u64),
        message: e.to_string(),
    })
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: Some(e.line() as u64),
        message: e.to_string(),
    })
}
