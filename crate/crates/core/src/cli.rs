//! `gridmix` command line.
//!
//! Exit status: 0 success, 1 invalid invocation or config, 2 data error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{load_config, Config};
use crate::dispatch::dispatch_year;
use crate::error::{Error, Result};
use crate::ingest::GapMode;
use crate::output::{self, RunManifest};
use crate::scenario::{compare_scenarios, prepare_scenario, run_scenario, ScenarioConfig, ScenarioReport};
use crate::storage::{dispatch_year_with_storage, size_storage, storage_utilization, StorageSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gridmix",
    version,
    about = "Carbon merit-order dispatch with curtailment-fed storage"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every scenario in a config and write reports.
    Run(RunArgs),
    /// Size the storage that absorbs all curtailment.
    SizeStorage(SizeArgs),
    /// Write plot-ready mix.csv and intensity.csv from a finished run.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    /// Reject incomplete hours and negative values (default).
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    /// Repair incomplete hours and negative values, with warnings.
    #[arg(long)]
    pub lenient: bool,
}

impl ModeArgs {
    fn apply(&self, config: &mut Config) {
        if self.strict {
            config.set_mode(GapMode::Strict);
        } else if self.lenient {
            config.set_mode(GapMode::Lenient);
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Scenarios to run concurrently.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    /// Reserved; the pipeline has no randomness.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Only this scenario (default: all).
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Directory written by `gridmix run`.
    #[arg(long)]
    pub out: PathBuf,
    /// Credit storage discharge to wind and solar in mix.csv.
    #[arg(long)]
    pub fold_storage: bool,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Diagnostics go to `stderr`, results to `stdout`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => EXIT_VALIDATION,
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SizeStorage(args) => cmd_size_storage(args, stdout),
        Command::Plotdata(args) => cmd_plotdata(&args.out, args.fold_storage),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            // Display already carries the whole source chain.
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_DATA
            }
        }
    }
}

fn load(config: &Path, mode: &ModeArgs) -> Result<Config> {
    let mut cfg = load_config(config)?;
    mode.apply(&mut cfg);
    Ok(cfg)
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let started = Instant::now();
    let config = load(&args.config, &args.mode)?;
    if let Some(seed) = args.seed {
        info!("--seed {seed} ignored: the pipeline is deterministic");
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs as usize)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", args.jobs)))?;
    let runs = pool.install(|| {
        config
            .scenarios
            .par_iter()
            .map(|s| {
                let run = run_scenario(s)?;
                output::write_scenario(&args.out, &run)?;
                info!("{}: done", s.name);
                Ok(run)
            })
            .collect::<Vec<Result<_>>>()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let reports: Vec<ScenarioReport> = runs.iter().map(|r| r.report.clone()).collect();
    let table = compare_scenarios(&reports, config.reference_index())?;
    output::write_atomic(&args.out.join(output::COMPARISON_FILE), &output::comparison_csv(&table))?;

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.path.clone(),
        reference: config.reference.clone(),
        scenarios: reports.iter().map(|r| r.name.clone()).collect(),
        inputs: digests(&config.scenarios)?,
        warnings: runs
            .iter()
            .flat_map(|r| r.warnings.iter().map(move |w| format!("{}: {w}", r.report.name)))
            .collect(),
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    output::write_atomic(&args.out.join(output::MANIFEST_FILE), &bytes)
}

fn digests(scenarios: &[ScenarioConfig]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for path in scenarios.iter().flat_map(ScenarioConfig::input_files) {
        let key = path.display().to_string();
        if let std::collections::btree_map::Entry::Vacant(slot) = out.entry(key) {
            slot.insert(output::sha256_file(&path)?);
        }
    }
    Ok(out)
}

/// Machine-readable result of `size-storage --json`, one per scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingReport {
    pub scenario: String,
    pub capacity_mwh: f64,
    pub capacity_gwh: f64,
    pub peak_soc_hour: Option<usize>,
    pub curtailment_without_storage_mwh: f64,
    pub residual_curtailment_mwh: f64,
    pub storage_utilization: f64,
}

pub fn size_scenario(config: &ScenarioConfig) -> Result<SizingReport> {
    let wrap = |e: Error| Error::Scenario {
        name: config.name.clone(),
        source: Box::new(e),
    };
    let prepared = prepare_scenario(config)?;
    let (load, fleet, table) = (&prepared.load, &prepared.fleet, &prepared.table);
    let before = dispatch_year(load, fleet, table).map_err(wrap)?;
    let sizing = size_storage(load, fleet, table).map_err(wrap)?;
    let (after, hours) =
        dispatch_year_with_storage(load, fleet, table, &StorageSpec::with_capacity(sizing.capacity)).map_err(wrap)?;
    Ok(SizingReport {
        scenario: config.name.clone(),
        capacity_mwh: sizing.capacity,
        capacity_gwh: sizing.capacity / 1000.0,
        peak_soc_hour: sizing.peak_hour,
        curtailment_without_storage_mwh: before.totals.total_curtailment(),
        residual_curtailment_mwh: after.totals.total_curtailment(),
        storage_utilization: storage_utilization(&hours),
    })
}

pub fn cmd_size_storage(args: &SizeArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = load(&args.config, &args.mode)?;
    let selected: Vec<&ScenarioConfig> = match &args.scenario {
        Some(name) => vec![config
            .scenarios
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| Error::Config(format!("no scenario named '{name}'")))?],
        None => config.scenarios.iter().collect(),
    };
    let reports = selected.into_iter().map(size_scenario).collect::<Result<Vec<_>>>()?;

    let io = |e| Error::io("<stdout>", e);
    if args.json {
        let text = serde_json::to_string_pretty(&reports).expect("sizing serializes");
        writeln!(stdout, "{text}").map_err(io)?;
    } else {
        for r in &reports {
            writeln!(stdout, "scenario: {}", r.scenario).map_err(io)?;
            writeln!(
                stdout,
                "  capacity: {} MWh ({} GWh)",
                output::fmt_num(r.capacity_mwh),
                output::fmt_num(r.capacity_gwh)
            )
            .map_err(io)?;
            match r.peak_soc_hour {
                Some(h) => writeln!(stdout, "  peak SOC hour: {h}"),
                None => writeln!(stdout, "  peak SOC hour: none"),
            }
            .map_err(io)?;
            writeln!(
                stdout,
                "  curtailment without storage: {} MWh",
                output::fmt_num(r.curtailment_without_storage_mwh)
            )
            .map_err(io)?;
            writeln!(
                stdout,
                "  curtailment after sizing: {} MWh",
                output::fmt_num(r.residual_curtailment_mwh)
            )
            .map_err(io)?;
            writeln!(
                stdout,
                "  hours storage used: {}",
                output::fmt_num(r.storage_utilization)
            )
            .map_err(io)?;
        }
    }
    Ok(())
}

pub fn cmd_plotdata(out: &Path, fold_storage: bool) -> Result<()> {
    let manifest_path = out.join(output::MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::MissingRunDir(out.to_path_buf()));
    }
    let manifest = output::read_manifest(&manifest_path)?;
    let reports = manifest
        .scenarios
        .iter()
        .map(|name| output::read_report(&output::scenario_dir(out, name).join(output::REPORT_FILE)))
        .collect::<Result<Vec<_>>>()?;
    output::write_atomic(&out.join(output::MIX_FILE), &output::mix_csv(&reports, fold_storage))?;
    output::write_atomic(&out.join(output::INTENSITY_FILE), &output::intensity_csv(&reports))
}
