//! Acceptance suite. Prints one `[PASS]`, `[FAIL]` or `[SKIP]` line per
//! criterion and exits non-zero if any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{NaiveDate, NaiveDateTime};
use common::*;
use gridmix::cli::{main_with_args, EXIT_OK};
use gridmix::config::load_config;
use gridmix::dispatch::{dispatch_hour, dispatch_year};
use gridmix::ingest::{average_to_hourly, read_fuel_mix, FuelMixRecord, GapMode};
use gridmix::output::read_report;
use gridmix::scenario::run_scenario;
use gridmix::storage::{dispatch_year_with_storage, size_storage, DischargeIntensity, StorageSpec};
use gridmix::types::{emissions_of, CarbonTable, FuelType, HOURS_PER_YEAR};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

// 1: greedy equals brute force on small integer instances.
fn merit_order_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let instances = 1000;
    for i in 0..instances {
        let n = rng.gen_range(1..=4);
        let fuels = pick_fuels(&mut rng, n);
        let table = dyadic_table(&mut rng, &fuels);
        let units: Vec<u32> = fuels.iter().map(|_| rng.gen_range(0..=6)).collect();
        let total: u32 = units.iter().sum();
        let load = rng.gen_range(0..=total + 3);
        let c = fuels.iter().cloned().zip(units.iter().map(|u| *u as f64)).collect();
        let curtailable = fuels.iter().filter(|f| f.is_variable_renewable()).cloned().collect();
        let greedy = dispatch_hour(load as f64, &c, &table, &curtailable).unwrap().emissions;
        let brute = integer_dispatches(&units, load.min(total))
            .into_iter()
            .map(|x| {
                let d = fuels.iter().cloned().zip(x.iter().map(|v| *v as f64)).collect();
                emissions_of(&d, &table).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        if greedy != brute {
            return Fail(format!("instance {i}: greedy {greedy} vs brute force {brute}"));
        }
    }
    let elapsed = started.elapsed();
    check(
        elapsed < Duration::from_secs(10),
        format!("{instances} instances exact, {:.2}s", elapsed.as_secs_f64()),
    )
}

const STORAGE_MIX: [FuelType; 6] = [
    FuelType::Wind,
    FuelType::Photovoltaic,
    FuelType::Nuclear,
    FuelType::NaturalGasCombinedCycle,
    FuelType::NaturalGasTurbine,
    FuelType::Coal,
];

// 2: hourly energy balance and exact lossless state-of-charge bookkeeping.
fn conservation() -> Outcome {
    let table = CarbonTable::default();
    let mut worst: f64 = 0.0;
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
        let fleet = random_fleet(&mut rng, &STORAGE_MIX, HOURS_PER_YEAR, 60.0);
        let load = random_load(&mut rng, HOURS_PER_YEAR, 300.0);
        let spec = StorageSpec {
            energy_capacity: rng.gen_range(0.0..500.0),
            charge_power: rng.gen_range(1.0..80.0),
            discharge_power: rng.gen_range(1.0..80.0),
            round_trip_efficiency: rng.gen_range(0.5..=1.0),
            initial_soc: 0.0,
            discharge_intensity: DischargeIntensity::Zero,
        };
        let plain = dispatch_year(&load, &fleet, &table).unwrap();
        let (with, _) = dispatch_year_with_storage(&load, &fleet, &table, &spec).unwrap();
        for h in plain.hours.iter().chain(&with.hours) {
            worst = worst.max((h.generation() + h.unmet - h.load).abs());
        }
    }
    if worst >= 1e-6 {
        return Fail(format!("energy balance off by {worst:e} MWh"));
    }
    // Whole-MWh data keeps every running sum exact.
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let fleet = integer_fleet(&mut rng, &STORAGE_MIX, HOURS_PER_YEAR, 40);
        let load = integer_load(&mut rng, HOURS_PER_YEAR, 150);
        for spec in [
            StorageSpec::unbounded(),
            StorageSpec::with_capacity(rng.gen_range(1..2000) as f64),
        ] {
            let (_, st) = dispatch_year_with_storage(&load, &fleet, &table, &spec).unwrap();
            let net: f64 = st.iter().map(|s| s.charged).sum::<f64>() - st.iter().map(|s| s.discharged).sum::<f64>();
            let delta = st.last().unwrap().soc_end - spec.initial_soc;
            if net != delta {
                return Fail(format!("seed {seed}: charged - discharged {net} vs delta SOC {delta}"));
            }
        }
    }
    Pass(format!("max balance error {worst:e} MWh; lossless delta SOC exact"))
}

// 3: storage never worsens emissions or curtailment; sized storage absorbs all.
fn storage_dominance() -> Outcome {
    let table = CarbonTable::default();
    let instances = 120;
    let mut worst_residual: f64 = 0.0;
    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let hours = rng.gen_range(24..=168);
        let fleet = random_fleet(&mut rng, &STORAGE_MIX, hours, 50.0);
        let load = random_load(&mut rng, hours, 200.0);
        let spec = StorageSpec {
            energy_capacity: rng.gen_range(0.0..400.0),
            charge_power: rng.gen_range(1.0..60.0),
            discharge_power: rng.gen_range(1.0..60.0),
            round_trip_efficiency: rng.gen_range(0.3..=1.0),
            initial_soc: 0.0,
            discharge_intensity: if rng.gen() {
                DischargeIntensity::Zero
            } else {
                DischargeIntensity::ChargedAverage
            },
        };
        let plain = dispatch_year(&load, &fleet, &table).unwrap();
        let (with, _) = dispatch_year_with_storage(&load, &fleet, &table, &spec).unwrap();
        if with.totals.emissions > plain.totals.emissions {
            return Fail(format!(
                "instance {i}: emissions rose {} -> {}",
                plain.totals.emissions, with.totals.emissions
            ));
        }
        if with.totals.total_curtailment() > plain.totals.total_curtailment() {
            return Fail(format!("instance {i}: curtailment rose"));
        }
        let sizing = size_storage(&load, &fleet, &table).unwrap();
        let (sized, _) =
            dispatch_year_with_storage(&load, &fleet, &table, &StorageSpec::with_capacity(sizing.capacity)).unwrap();
        worst_residual = worst_residual.max(sized.totals.total_curtailment());
    }
    check(
        worst_residual < 1e-6,
        format!("{instances} instances; max residual curtailment after sizing {worst_residual:e} MWh"),
    )
}

// 4: low-carbon supply covering load every hour keeps coal at zero.
fn coal_displacement() -> Outcome {
    let table = CarbonTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cheaper = [
        FuelType::Wind,
        FuelType::Photovoltaic,
        FuelType::Nuclear,
        FuelType::Hydroelectric,
        FuelType::Biomass,
        FuelType::NaturalGasCombinedCycle,
    ];
    // quarter-MWh values keep every partial sum exact
    let mut entries: Vec<(FuelType, Vec<f64>)> = cheaper
        .iter()
        .map(|f| {
            (
                f.clone(),
                (0..HOURS_PER_YEAR)
                    .map(|_| rng.gen_range(0..400) as f64 / 4.0)
                    .collect(),
            )
        })
        .collect();
    let load: Vec<f64> = (0..HOURS_PER_YEAR)
        .map(|h| {
            let low: f64 = entries.iter().map(|(_, v)| v[h]).sum();
            // a quarter-MWh value in [0, low]
            (low * rng.gen_range(0..=4) as f64).floor() / 4.0
        })
        .collect();
    entries.push((
        FuelType::Coal,
        (0..HOURS_PER_YEAR)
            .map(|_| rng.gen_range(0..400) as f64 / 4.0)
            .collect(),
    ));
    let f = fleet(entries);
    let year = dispatch_year(&series(load), &f, &table).unwrap();
    let coal = year.totals.generation.get(&FuelType::Coal).copied().unwrap_or(0.0);
    let unmet: f64 = year.hours.iter().map(|h| h.unmet).sum();
    check(
        coal == 0.0 && unmet == 0.0,
        format!("annual coal {coal} MWh over {HOURS_PER_YEAR} hours, unmet {unmet}"),
    )
}

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn run_cli(args: &[&str]) -> i32 {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["gridmix"];
    full.extend_from_slice(args);
    main_with_args(full, &mut out, &mut err)
}

fn synthetic_run(out: &Path) -> i32 {
    let config = manifest_dir().join("data/synthetic/config.toml");
    let code = run_cli(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    if code != EXIT_OK {
        return code;
    }
    run_cli(&["plotdata", "--out", out.to_str().unwrap()])
}

// 5: bundled synthetic scenarios match the independently generated goldens.
fn golden_scenario() -> Outcome {
    let golden = manifest_dir().join("tests/golden/synthetic");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let code = synthetic_run(dir.path());
        if code != EXIT_OK {
            return Fail(format!("run exited with {code}"));
        }
    }
    let mut files = vec![
        PathBuf::from("comparison.csv"),
        "mix.csv".into(),
        "intensity.csv".into(),
    ];
    for s in ["baseline", "future", "future_sized", "future_battery"] {
        files.push(Path::new(s).join("report.json"));
        files.push(Path::new(s).join("hourly.csv"));
    }
    for file in &files {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        if x != y {
            return Fail(format!("{} differs between runs", file.display()));
        }
        let want = std::fs::read(golden.join(file)).unwrap();
        let same = if file.extension().is_some_and(|e| e == "json") {
            serde_json::from_slice::<serde_json::Value>(&x).unwrap()
                == serde_json::from_slice::<serde_json::Value>(&want).unwrap()
        } else {
            x == want
        };
        if !same {
            return Fail(format!("{} differs from golden", file.display()));
        }
    }
    // hand-checked values for the sized scenario
    let sized = read_report(&a.path().join("future_sized/report.json")).unwrap();
    let hand = sized.storage_capacity_mwh == Some(118.5)
        && sized.curtailment_without_storage_mwh == 213.0
        && sized.annual_curtailment_mwh == 0.0
        && sized.storage_utilization == Some(0.1875);
    check(
        hand,
        format!("{} files byte-identical and equal to golden", files.len()),
    )
}

// 6: optional comparison with published full-year results.
fn published_figures() -> Outcome {
    const VAR: &str = "GRIDMIX_ERCOT_CONFIG";
    let Some(path) = std::env::var_os(VAR) else {
        return Skip(format!(
            "set {VAR} to a config with scenarios baseline_2023, storage_2023, storage_2033"
        ));
    };
    let config = match load_config(Path::new(&path)) {
        Ok(c) => c,
        Err(e) => return Fail(e.to_string()),
    };
    let find = |name: &str| config.scenarios.iter().find(|s| s.name == name);
    let mut notes = Vec::new();
    let mut ok = true;
    let mut compare = |what: String, actual: f64, expected: f64| {
        let good = within_relative(actual, expected, 0.10);
        ok &= good;
        notes.push(format!(
            "{what} {actual:.2} vs {expected}{}",
            if good { "" } else { " (out of range)" }
        ));
    };
    let expected = [
        ("baseline_2023", 31.49, None),
        ("storage_2023", 55.44, Some((34.28, 14.47))),
        ("storage_2033", 48.72, Some((33.67, 4.33))),
    ];
    for (name, share, storage) in expected {
        let Some(scenario) = find(name) else {
            return Fail(format!("scenario {name} missing from config"));
        };
        let report = match run_scenario(scenario) {
            Ok(run) => run.report,
            Err(e) => return Fail(e.to_string()),
        };
        compare(format!("{name} share %"), report.renewables_share * 100.0, share);
        if let Some((gwh, used)) = storage {
            compare(
                format!("{name} GWh"),
                report.storage_capacity_mwh.unwrap_or(0.0) / 1000.0,
                gwh,
            );
            compare(
                format!("{name} used %"),
                report.storage_utilization.unwrap_or(0.0) * 100.0,
                used,
            );
        }
    }
    check(ok, notes.join("; "))
}

// 7: quarter-hour averaging matches a reshape-mean oracle and reconciles 4x.
fn quarter_hour_averaging() -> Outcome {
    let start: NaiveDateTime = NaiveDate::from_ymd_opt(2023, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap();
    let records = |values: &[f64]| -> Vec<FuelMixRecord> {
        values
            .iter()
            .enumerate()
            .map(|(i, &energy)| FuelMixRecord {
                timestamp: start + chrono::Duration::minutes(15 * i as i64),
                fuel: FuelType::Wind,
                energy,
            })
            .collect()
    };
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let values: Vec<f64> = (0..4 * HOURS_PER_YEAR).map(|_| rng.gen_range(0.0..10_000.0)).collect();
        let oracle: Vec<f64> = values.chunks(4).map(|r| (r[0] + r[1] + r[2] + r[3]) / 4.0).collect();
        let got = average_to_hourly(&records(&values), GapMode::Strict).unwrap();
        if got.series.values() != oracle.as_slice() {
            return Fail(format!("seed {seed}: hourly means differ from reshape oracle"));
        }
    }

    // reconciliation through a strict-mode file read, on a quarter-MWh grid
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let fuels = ["Wind", "Solar", "Gas-CC", "Nuclear"];
    let mut text = String::from("timestamp,fuel,mwh\n");
    let mut quarter_totals = [0.0f64; 4];
    for q in 0..4 * HOURS_PER_YEAR {
        let ts = start + chrono::Duration::minutes(15 * q as i64);
        for (i, fuel) in fuels.iter().enumerate() {
            let v = rng.gen_range(0..20_000) as f64 / 4.0;
            quarter_totals[i] += v;
            text.push_str(&format!("{},{fuel},{v}\n", ts.format("%Y-%m-%d %H:%M")));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fuel_mix.csv");
    std::fs::write(&path, text).unwrap();
    let mix = read_fuel_mix(&path, GapMode::Strict).unwrap();
    for (i, fuel) in fuels.iter().enumerate() {
        let parsed: FuelType = fuel.parse().unwrap();
        let hourly = mix.series[&parsed].total();
        if 4.0 * hourly != quarter_totals[i] {
            return Fail(format!("{fuel}: 4 x {hourly} != {}", quarter_totals[i]));
        }
    }
    Pass(format!(
        "5 random 4x{HOURS_PER_YEAR} tables exact; 4-fuel file reconciles exactly"
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 merit-order oracle equivalence", merit_order_oracle),
        ("2 conservation", conservation),
        ("3 storage dominance", storage_dominance),
        ("4 coal displacement", coal_displacement),
        ("5 golden synthetic scenario", golden_scenario),
        ("6 full-year reference figures", published_figures),
        ("7 quarter-hour averaging", quarter_hour_averaging),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Pass(detail) => println!("[PASS] {name}: {detail}"),
            Skip(detail) => println!("[SKIP] {name}: {detail}"),
            Fail(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
