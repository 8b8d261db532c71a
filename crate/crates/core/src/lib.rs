//! Hourly grid dispatch by carbon merit order, with storage charged from
//! curtailed wind and solar.
//!
//! The pipeline: [`ingest`] quarter-hour fuel mix, load and project data into
//! a [`types::Fleet`]; [`dispatch`] each hour cheapest-carbon first; re-run
//! with a [`storage`] reservoir that soaks up curtailment and discharges
//! ahead of fossil fuels; summarize and compare with [`scenario`].

pub mod cli;
pub mod config;
pub mod dispatch;
pub mod error;
pub mod ingest;
pub mod output;
pub mod scenario;
pub mod storage;
pub mod types;

pub use dispatch::{curtailment_series, dispatch_hour, dispatch_year, HourDispatch, YearDispatch};
pub use error::{Error, Result};
pub use scenario::{compare_scenarios, generation_mix, run_scenario, ScenarioConfig, ScenarioReport, StorageChoice};
pub use storage::{
    dispatch_year_with_storage, size_storage, storage_utilization, StorageHour, StorageSizing, StorageSpec,
};
pub use types::{emissions_of, merit_order, CarbonTable, Fleet, FuelType, HourlySeries};
