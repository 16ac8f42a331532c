//! Energy-mix analytics and long-horizon CO2 emission forecasting.
//!
//! The crate ingests annual emission, energy-mix and population CSVs,
//! prepares the series (gap interpolation, outlier flags, stationarity
//! diagnostics), benchmarks ARIMA, SARIMA and damped Holt-Winters models
//! per country, and projects emissions decades ahead with 95% prediction
//! intervals. The `co2cast` binary drives the same pipeline from the
//! command line and emits JSON reports, per-country CSVs and SVG charts.

pub mod energymix;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod plot;
pub mod preprocess;
pub mod report;
mod stats;

pub use error::{Error, Result};
pub use ingest::{AnnualSeries, EnergyMixTable, EnergyMode, MixRow, ObsFlags, PopulationSeries};
pub use models::{
    forecast, ArimaOrder, FittedModel, ForecastPath, HoltParams, ModelFamily, SarimaOrder,
};
