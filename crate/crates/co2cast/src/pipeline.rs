//! End-to-end orchestration: ingest, preprocess, classify, benchmark,
//! select, refit on full history and project forward.
//!
//! Countries are independent work units processed in code order; one
//! country's failure lands in the `errors` array without aborting the
//! rest. All randomness derives from the configured seed, so identical
//! configuration and inputs reproduce byte-identical reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::energymix::{classify, compute_indices, per_capita, ClassifyThresholds};
use crate::error::{Error, Result};
use crate::evaluation::{
    grid_search, select_best, BenchmarkRow, GridSearchOutcome, ModelCandidate,
};
use crate::ingest::{
    load_emissions_csv, load_energy_csv, load_population_csv, AnnualSeries, EnergyMixTable,
    EnergyMode, PopulationSeries,
};
use crate::models::{
    forecast, ArimaOrder, FittedModel, HoltParams, HoltSpec, ModelSpecConfig, SarimaOrder,
};
use crate::preprocess::{
    adf_test, annotate_outliers, detect_outliers, difference, interpolate_missing, kpss_test,
    AdfRegression, KpssRegression, OutlierMethod, StationarityResult,
};

/// Grid bounds per model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub arima_max_p: usize,
    pub arima_max_d: usize,
    pub arima_max_q: usize,
    pub sarima_max_sp: usize,
    pub sarima_max_sd: usize,
    pub sarima_max_sq: usize,
    pub holt_phi: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            arima_max_p: 2,
            arima_max_d: 2,
            arima_max_q: 2,
            sarima_max_sp: 2,
            sarima_max_sd: 1,
            sarima_max_sq: 2,
            holt_phi: vec![0.8, 0.9, 0.98, 1.0],
        }
    }
}

impl GridConfig {
    fn arima_grid(&self) -> Vec<ModelCandidate> {
        let mut grid = Vec::new();
        for d in 0..=self.arima_max_d {
            for p in 0..=self.arima_max_p {
                for q in 0..=self.arima_max_q {
                    grid.push(ModelCandidate::Arima(ArimaOrder { p, d, q }));
                }
            }
        }
        grid
    }

    fn sarima_grid(&self, period: usize) -> Vec<ModelCandidate> {
        let mut grid = Vec::new();
        for d in 0..=self.arima_max_d {
            for p in 0..=self.arima_max_p {
                for q in 0..=self.arima_max_q {
                    let base = ArimaOrder { p, d, q };
                    if period <= 1 {
                        grid.push(ModelCandidate::Sarima(SarimaOrder::from_arima(base)));
                    } else {
                        for sd in 0..=self.sarima_max_sd {
                            for sp in 0..=self.sarima_max_sp {
                                for sq in 0..=self.sarima_max_sq {
                                    grid.push(ModelCandidate::Sarima(SarimaOrder {
                                        base,
                                        seasonal_p: sp,
                                        seasonal_d: sd,
                                        seasonal_q: sq,
                                        period,
                                    }));
                                }
                            }
                        }
                    }
                }
            }
        }
        grid
    }

    fn holt_grid(&self) -> Vec<ModelCandidate> {
        let mut grid = Vec::new();
        for ai in 1..=19 {
            let alpha = ai as f64 * 0.05;
            for bi in 0..=19 {
                let beta = bi as f64 * 0.05;
                for &phi in &self.holt_phi {
                    grid.push(ModelCandidate::HoltWinters(HoltSpec::Fixed(HoltParams {
                        alpha,
                        beta,
                        phi,
                        seasonal_period: 1,
                        gamma: 0.0,
                    })));
                }
            }
        }
        grid
    }
}

/// Full pipeline configuration. A flat `key = value` config file populates
/// it; command-line flags override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub emissions_path: PathBuf,
    pub energy_path: PathBuf,
    pub energy_mode: EnergyMode,
    pub population_path: Option<PathBuf>,
    /// ISO-3 filter; `None` runs every country in the emissions file.
    pub countries: Option<Vec<String>>,
    pub train_fraction: f64,
    pub forecast_end_year: i32,
    pub interval_level: f64,
    pub sarima_seasonal_period: usize,
    pub classify_thresholds: ClassifyThresholds,
    pub grids: GridConfig,
    pub rng_seed: u64,
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            emissions_path: PathBuf::new(),
            energy_path: PathBuf::new(),
            energy_mode: EnergyMode::Shares,
            population_path: None,
            countries: None,
            train_fraction: 0.8,
            forecast_end_year: 2060,
            interval_level: 0.95,
            sarima_seasonal_period: 1,
            classify_thresholds: ClassifyThresholds::default(),
            grids: GridConfig::default(),
            rng_seed: 42,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    /// Parses a flat `key = value` file; `#` starts a comment. Unknown keys
    /// are rejected rather than silently ignored.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let mut config = PipelineConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            config.apply_key(key.trim(), value.trim()).map_err(|e| {
                Error::Config(format!("line {}: {e}", lineno + 1))
            })?;
        }
        Ok(config)
    }

    fn apply_key(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for {key}")))
        }
        match key {
            "emissions_path" => self.emissions_path = PathBuf::from(value),
            "energy_path" => self.energy_path = PathBuf::from(value),
            "energy_mode" => {
                self.energy_mode = match value {
                    "shares" => EnergyMode::Shares,
                    "generation" => EnergyMode::Generation,
                    other => {
                        return Err(Error::Config(format!(
                            "energy_mode must be shares or generation, got `{other}`"
                        )))
                    }
                }
            }
            "population_path" => self.population_path = Some(PathBuf::from(value)),
            "countries" => {
                self.countries = Some(
                    value
                        .split(',')
                        .map(|c| c.trim().to_string())
                        .filter(|c| !c.is_empty())
                        .collect(),
                )
            }
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "forecast_end_year" => self.forecast_end_year = parse(key, value)?,
            "interval_level" => self.interval_level = parse(key, value)?,
            "sarima_seasonal_period" => self.sarima_seasonal_period = parse(key, value)?,
            "rng_seed" => self.rng_seed = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "classify.fossil_threshold" => self.classify_thresholds.fossil = parse(key, value)?,
            "classify.renewable_threshold" => {
                self.classify_thresholds.renewable = parse(key, value)?
            }
            "grid.arima_max_p" => self.grids.arima_max_p = parse(key, value)?,
            "grid.arima_max_d" => self.grids.arima_max_d = parse(key, value)?,
            "grid.arima_max_q" => self.grids.arima_max_q = parse(key, value)?,
            "grid.sarima_max_sp" => self.grids.sarima_max_sp = parse(key, value)?,
            "grid.sarima_max_sd" => self.grids.sarima_max_sd = parse(key, value)?,
            "grid.sarima_max_sq" => self.grids.sarima_max_sq = parse(key, value)?,
            "grid.holt_phi" => {
                let mut phis = Vec::new();
                for part in value.split(',') {
                    phis.push(parse::<f64>(key, part.trim())?);
                }
                self.grids.holt_phi = phis;
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Static validation; data-dependent checks (the forecast span) happen
    /// after ingestion.
    pub fn validate(&self) -> Result<()> {
        if self.emissions_path.as_os_str().is_empty() {
            return Err(Error::Config("emissions_path is required".into()));
        }
        if self.energy_path.as_os_str().is_empty() {
            return Err(Error::Config("energy_path is required".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} outside (0,1)",
                self.train_fraction
            )));
        }
        if !(self.interval_level > 0.0 && self.interval_level < 1.0) {
            return Err(Error::Config(format!(
                "interval_level {} outside (0,1)",
                self.interval_level
            )));
        }
        if self.sarima_seasonal_period == 0 {
            return Err(Error::Config("sarima_seasonal_period must be >= 1".into()));
        }
        if self.grids.holt_phi.is_empty()
            || self
                .grids
                .holt_phi
                .iter()
                .any(|&p| !(p > 0.0 && p <= 1.0))
        {
            return Err(Error::Config("grid.holt_phi values must lie in (0,1]".into()));
        }
        for t in [
            self.classify_thresholds.fossil,
            self.classify_thresholds.renewable,
        ] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!(
                    "classification threshold {t} outside [0,1]"
                )));
            }
        }
        if let Some(countries) = &self.countries {
            for code in countries {
                if code.len() != 3 || !code.chars().all(|c| c.is_ascii_alphabetic()) {
                    return Err(Error::Config(format!(
                        "country filter `{code}` is not a 3-letter ISO code"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One country's published report entry, shaped exactly like the
/// `report.json` schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryReport {
    pub country: String,
    pub classification: ClassificationSummary,
    pub preprocessing: PreprocessSummary,
    pub history_stats: HistoryStats,
    pub benchmark: Vec<BenchmarkEntry>,
    pub selected: SelectedModel,
    pub forecast: Vec<ForecastEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub label: String,
    pub avg_fossil: f64,
    pub avg_renewable: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSummary {
    pub interpolated_years: Vec<i32>,
    pub outliers: Vec<OutlierEntry>,
    pub adf: StationarityResult,
    pub kpss: StationarityResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierEntry {
    pub year: i32,
    pub method: OutlierMethod,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryStats {
    pub cagr_pct: Option<f64>,
    pub cumulative_mt: f64,
    pub per_capita_first: Option<f64>,
    pub per_capita_last: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub model: String,
    pub mae: f64,
    pub rmse: f64,
    pub r2: Option<f64>,
    pub mape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedModel {
    pub model: String,
    pub config: ModelSpecConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub year: i32,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

/// A failed country with the stage that failed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryError {
    pub country: String,
    pub stage: String,
    pub message: String,
}

/// Everything produced for one successful country: the report entry plus
/// the preprocessed history and the refitted model behind it.
#[derive(Debug, Clone)]
pub struct CountryOutcome {
    pub report: CountryReport,
    pub history: AnnualSeries,
    pub model: FittedModel,
    pub benchmark_rows: Vec<BenchmarkRow>,
}

/// Full pipeline result.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub countries: Vec<CountryOutcome>,
    pub errors: Vec<CountryError>,
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Per-country forecast seed, independent of processing order.
pub fn country_seed(rng_seed: u64, country: &str) -> u64 {
    splitmix64(rng_seed ^ fnv1a(country))
}

/// Runs every stage for every selected country. Countries are pure,
/// independent units; output is ordered by country code so any execution
/// order yields identical bytes.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate()?;

    let emissions = load_emissions_csv(&config.emissions_path)?;
    let energy = load_energy_csv(&config.energy_path, config.energy_mode)?;
    let population = match &config.population_path {
        Some(path) => load_population_csv(path)?,
        None => Vec::new(),
    };

    let by_country: BTreeMap<&str, &AnnualSeries> =
        emissions.iter().map(|s| (s.country.as_str(), s)).collect();
    let energy_by_country: BTreeMap<&str, &EnergyMixTable> =
        energy.iter().map(|t| (t.country.as_str(), t)).collect();
    let population_by_country: BTreeMap<&str, &PopulationSeries> =
        population.iter().map(|p| (p.country.as_str(), p)).collect();

    let selected: Vec<String> = match &config.countries {
        Some(filter) => filter.clone(),
        None => by_country.keys().map(|c| c.to_string()).collect(),
    };

    // the forecast span must extend beyond every selected history
    for code in &selected {
        if let Some(series) = by_country.get(code.as_str()) {
            if config.forecast_end_year <= series.last_year() {
                return Err(Error::Config(format!(
                    "forecast_end_year {} does not extend past the {} history ending {}",
                    config.forecast_end_year,
                    code,
                    series.last_year()
                )));
            }
        }
    }

    let mut countries = Vec::new();
    let mut errors = Vec::new();
    for code in &selected {
        match run_country(
            config,
            code,
            by_country.get(code.as_str()).copied(),
            energy_by_country.get(code.as_str()).copied(),
            population_by_country.get(code.as_str()).copied(),
        ) {
            Ok(outcome) => countries.push(outcome),
            Err((stage, err)) => errors.push(CountryError {
                country: code.clone(),
                stage: stage.to_string(),
                message: err.to_string(),
            }),
        }
    }
    countries.sort_by(|a, b| a.report.country.cmp(&b.report.country));
    errors.sort_by(|a, b| a.country.cmp(&b.country));

    Ok(PipelineOutcome { countries, errors })
}

type StageResult<T> = std::result::Result<T, (&'static str, Error)>;

fn stage<T>(name: &'static str, result: Result<T>) -> StageResult<T> {
    result.map_err(|e| (name, e))
}

fn run_country(
    config: &PipelineConfig,
    code: &str,
    series: Option<&AnnualSeries>,
    energy: Option<&EnergyMixTable>,
    population: Option<&PopulationSeries>,
) -> StageResult<CountryOutcome> {
    let series = series.ok_or((
        "ingest",
        Error::Domain(format!("country {code} not present in emissions data")),
    ))?;

    // preprocess: fill gaps, flag outliers, stationarity on first differences
    let mut history = stage("preprocess", interpolate_missing(series))?;
    let interpolated_years: Vec<i32> = history
        .flags
        .iter()
        .enumerate()
        .filter(|(_, f)| f.interpolated)
        .map(|(i, _)| history.year_at(i))
        .collect();

    let mut outliers = Vec::new();
    for method in [OutlierMethod::ZScore, OutlierMethod::Iqr] {
        let report = stage("preprocess", detect_outliers(&history, method))?;
        for (&idx, &score) in report.indices.iter().zip(&report.scores) {
            outliers.push(OutlierEntry {
                year: history.year_at(idx),
                method,
                score,
            });
        }
        annotate_outliers(&mut history, &report);
    }
    outliers.sort_by(|a, b| a.year.cmp(&b.year).then(a.score.total_cmp(&b.score)));

    let differenced = stage("preprocess", difference(&history.values, 1))?;
    let adf = stage(
        "preprocess",
        adf_test(&differenced, None, AdfRegression::Constant),
    )?;
    let kpss = stage("preprocess", kpss_test(&differenced, KpssRegression::Level))?;

    // energy mix and classification
    let energy = energy.ok_or((
        "energymix",
        Error::Domain(format!("country {code} not present in energy data")),
    ))?;
    let indices = stage("energymix", compute_indices(energy))?;
    let category = classify(&indices, config.classify_thresholds);

    // descriptive statistics
    let first = *history.values.first().expect("non-empty");
    let last = *history.values.last().expect("non-empty");
    let span_years = (history.len() - 1) as u32;
    let cagr_pct = if first > 0.0 && span_years > 0 {
        Some(crate::energymix::cagr(first, last, span_years).map_err(|e| ("history_stats", e))?)
    } else {
        None
    };
    let cumulative_mt = stage(
        "history_stats",
        crate::energymix::cumulative(&history, history.start_year, history.last_year()),
    )?;
    let (per_capita_first, per_capita_last) = match population {
        Some(pop) => {
            let pc = stage("history_stats", per_capita(&history, pop))?;
            (
                pc.rows.first().map(|r| r.1),
                pc.rows.last().map(|r| r.1),
            )
        }
        None => (None, None),
    };

    // benchmark the three families
    let arima = stage(
        "benchmark",
        grid_search(&history, &config.grids.arima_grid(), config.train_fraction),
    )?;
    let sarima = stage(
        "benchmark",
        grid_search(
            &history,
            &config.grids.sarima_grid(config.sarima_seasonal_period),
            config.train_fraction,
        ),
    )?;
    let holt = stage(
        "benchmark",
        grid_search(&history, &config.grids.holt_grid(), config.train_fraction),
    )?;
    let rows: Vec<BenchmarkRow> = [arima, sarima, holt]
        .into_iter()
        .map(|o: GridSearchOutcome| o.row)
        .collect();
    let ranked = stage("select", select_best(rows))?;
    let winner = ranked[0].clone();

    // refit the winning configuration on the full history, then project
    let candidate = match &winner.config {
        ModelSpecConfig::Arima { order } => ModelCandidate::Arima(*order),
        ModelSpecConfig::Sarima { order } => ModelCandidate::Sarima(*order),
        ModelSpecConfig::HoltWinters { params } => {
            ModelCandidate::HoltWinters(HoltSpec::Fixed(*params))
        }
    };
    let model = stage("refit", candidate.fit(&history))?;
    let horizon = (config.forecast_end_year - history.last_year()) as usize;
    let path = stage(
        "forecast",
        forecast(
            &model,
            horizon,
            config.interval_level,
            country_seed(config.rng_seed, code),
        ),
    )?;

    let report = CountryReport {
        country: code.to_string(),
        classification: ClassificationSummary {
            label: category.label.to_string(),
            avg_fossil: category.avg_fossil,
            avg_renewable: category.avg_renewable,
        },
        preprocessing: PreprocessSummary {
            interpolated_years,
            outliers,
            adf,
            kpss,
        },
        history_stats: HistoryStats {
            cagr_pct,
            cumulative_mt,
            per_capita_first,
            per_capita_last,
        },
        benchmark: ranked
            .iter()
            .map(|row| BenchmarkEntry {
                model: row.family.to_string(),
                mae: row.test_metrics.mae,
                rmse: row.test_metrics.rmse,
                r2: row.test_metrics.r2,
                mape: row.test_metrics.mape,
            })
            .collect(),
        selected: SelectedModel {
            model: winner.family.to_string(),
            config: winner.config.clone(),
        },
        forecast: path
            .points
            .iter()
            .enumerate()
            .map(|(h, &point)| ForecastEntry {
                year: path.start_year + h as i32,
                point,
                lower: path.lower[h],
                upper: path.upper[h],
            })
            .collect(),
    };

    Ok(CountryOutcome {
        report,
        history,
        model,
        benchmark_rows: ranked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn config_file_round_trip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "# pipeline setup\nemissions_path = data/e.csv\nenergy_path = data/x.csv\n\
             energy_mode = generation\ncountries = NGA, BRA\ntrain_fraction = 0.75\n\
             forecast_end_year = 2050 # inline comment\nrng_seed = 7\n\
             classify.fossil_threshold = 0.82\ngrid.holt_phi = 0.9,1.0"
        )
        .unwrap();
        let config = PipelineConfig::from_file(f.path()).unwrap();
        assert_eq!(config.emissions_path, PathBuf::from("data/e.csv"));
        assert_eq!(config.energy_mode, EnergyMode::Generation);
        assert_eq!(config.countries, Some(vec!["NGA".to_string(), "BRA".to_string()]));
        assert_eq!(config.train_fraction, 0.75);
        assert_eq!(config.forecast_end_year, 2050);
        assert_eq!(config.rng_seed, 7);
        assert_eq!(config.classify_thresholds.fossil, 0.82);
        assert_eq!(config.grids.holt_phi, vec![0.9, 1.0]);
        // untouched keys keep their defaults
        assert_eq!(config.interval_level, 0.95);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "emission_path = typo.csv").unwrap();
        assert!(matches!(
            PipelineConfig::from_file(f.path()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn hostile_country_codes_fail_validation() {
        let mut config = PipelineConfig::default();
        config.emissions_path = PathBuf::from("e.csv");
        config.energy_path = PathBuf::from("x.csv");
        config.countries = Some(vec!["../evil".to_string()]);
        assert!(matches!(config.validate(), Err(Error::Config(_))));
        config.countries = Some(vec!["NGA".to_string()]);
        assert!(config.validate().is_ok());
    }

    #[test]
    fn seeds_differ_by_country_but_not_by_order() {
        let a = country_seed(42, "NGA");
        let b = country_seed(42, "BRA");
        assert_ne!(a, b);
        assert_eq!(a, country_seed(42, "NGA"));
    }
}
