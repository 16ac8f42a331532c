//! Command-line driver for the emissions analytics pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use co2cast::energymix::{classify, compute_indices};
use co2cast::error::Error;
use co2cast::ingest::{load_emissions_csv, load_energy_csv, load_population_csv, EnergyMode};
use co2cast::models::FittedModel;
use co2cast::pipeline::{run_pipeline, CountryOutcome, PipelineConfig, PipelineOutcome};
use co2cast::plot::emit_plots;
use co2cast::report::{emit_report, persist_models, Report};

const EXIT_OK: u8 = 0;
const EXIT_TOTAL_FAILURE: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// National energy-mix characterization and long-horizon CO2 emission
/// forecasting: ARIMA, SARIMA and damped Holt-Winters benchmarked per
/// country, the winner projected forward with 95% prediction intervals.
#[derive(Parser)]
#[command(name = "co2cast", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Flat key = value configuration file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Emissions CSV (country,year,emissions_mt).
    #[arg(long)]
    emissions: Option<PathBuf>,
    /// Energy CSV (country,year,source,value).
    #[arg(long)]
    energy: Option<PathBuf>,
    /// How energy values are expressed: shares or generation.
    #[arg(long)]
    energy_mode: Option<String>,
    /// Optional population CSV (country,year,population).
    #[arg(long)]
    population: Option<PathBuf>,
    /// ISO-3 country filter; repeat for several countries.
    #[arg(long = "country")]
    countries: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Seed for all randomness in the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Final forecast year.
    #[arg(long)]
    end_year: Option<i32>,
    /// Prediction-interval level in (0,1).
    #[arg(long)]
    level: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the input files without modelling anything.
    Validate(CommonOpts),
    /// Compute energy-mix indices and archetype labels.
    Classify(CommonOpts),
    /// Benchmark the three model families per country.
    Benchmark(CommonOpts),
    /// Run the pipeline and write forecast CSVs and charts.
    Forecast(CommonOpts),
    /// Full pipeline: report.json, CSVs, charts and persisted models.
    Run(CommonOpts),
    /// Re-emit CSVs and charts from a previous run's output directory.
    Report(CommonOpts),
}

fn build_config(opts: &CommonOpts) -> Result<PipelineConfig, Error> {
    let mut config = match &opts.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(p) = &opts.emissions {
        config.emissions_path = p.clone();
    }
    if let Some(p) = &opts.energy {
        config.energy_path = p.clone();
    }
    if let Some(mode) = &opts.energy_mode {
        config.energy_mode = match mode.as_str() {
            "shares" => EnergyMode::Shares,
            "generation" => EnergyMode::Generation,
            other => {
                return Err(Error::Config(format!(
                    "energy mode must be shares or generation, got `{other}`"
                )))
            }
        };
    }
    if let Some(p) = &opts.population {
        config.population_path = Some(p.clone());
    }
    if !opts.countries.is_empty() {
        config.countries = Some(opts.countries.clone());
    }
    if let Some(dir) = &opts.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(seed) = opts.seed {
        config.rng_seed = seed;
    }
    if let Some(year) = opts.end_year {
        config.forecast_end_year = year;
    }
    if let Some(level) = opts.level {
        config.interval_level = level;
    }
    config.validate()?;
    Ok(config)
}

fn exit_for_outcome(outcome: &PipelineOutcome) -> u8 {
    if outcome.countries.is_empty() && !outcome.errors.is_empty() {
        EXIT_TOTAL_FAILURE
    } else if !outcome.errors.is_empty() {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

fn print_errors(outcome: &PipelineOutcome) {
    for err in &outcome.errors {
        eprintln!("error [{} @ {}]: {}", err.country, err.stage, err.message);
    }
}

fn cmd_validate(config: &PipelineConfig) -> Result<u8, Error> {
    let emissions = load_emissions_csv(&config.emissions_path)?;
    println!("emissions: {} countries", emissions.len());
    for series in &emissions {
        let gaps = series.flags.iter().filter(|f| f.missing).count();
        println!(
            "  {}: {}..{} ({} years, {} gaps)",
            series.country,
            series.start_year,
            series.last_year(),
            series.len(),
            gaps
        );
    }
    let energy = load_energy_csv(&config.energy_path, config.energy_mode)?;
    println!("energy mix: {} countries", energy.len());
    for table in &energy {
        println!("  {}: {} years", table.country, table.rows.len());
    }
    if let Some(path) = &config.population_path {
        let population = load_population_csv(path)?;
        println!("population: {} countries", population.len());
    }
    Ok(EXIT_OK)
}

fn cmd_classify(config: &PipelineConfig) -> Result<u8, Error> {
    let energy = load_energy_csv(&config.energy_path, config.energy_mode)?;
    println!("{:<8}{:>12}{:>12}  {}", "country", "avg_fossil", "avg_renew", "label");
    for table in &energy {
        if let Some(filter) = &config.countries {
            if !filter.contains(&table.country) {
                continue;
            }
        }
        let indices = compute_indices(table)?;
        let category = classify(&indices, config.classify_thresholds);
        println!(
            "{:<8}{:>12.3}{:>12.3}  {}",
            table.country, category.avg_fossil, category.avg_renewable, category.label
        );
    }
    Ok(EXIT_OK)
}

fn cmd_benchmark(config: &PipelineConfig) -> Result<u8, Error> {
    let outcome = run_pipeline(config)?;
    for country in &outcome.countries {
        let report = &country.report;
        println!("{} (selected: {})", report.country, report.selected.model);
        println!(
            "  {:<14}{:>10}{:>10}{:>9}{:>9}",
            "model", "mae", "rmse", "r2", "mape"
        );
        for row in &report.benchmark {
            println!(
                "  {:<14}{:>10.2}{:>10.2}{:>9}{:>9.2}",
                row.model,
                row.mae,
                row.rmse,
                row.r2.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
                row.mape
            );
        }
    }
    print_errors(&outcome);
    Ok(exit_for_outcome(&outcome))
}

fn cmd_forecast(config: &PipelineConfig) -> Result<u8, Error> {
    let outcome = run_pipeline(config)?;
    std::fs::create_dir_all(&config.out_dir)?;
    for country in &outcome.countries {
        co2cast::report::write_forecast_csv(country, &config.out_dir)?;
    }
    emit_plots(&outcome.countries, &config.out_dir)?;
    println!(
        "wrote forecasts and charts for {} countries to {}",
        outcome.countries.len(),
        config.out_dir.display()
    );
    print_errors(&outcome);
    Ok(exit_for_outcome(&outcome))
}

fn cmd_run(config: &PipelineConfig) -> Result<u8, Error> {
    let outcome = run_pipeline(config)?;
    let report = Report::new(
        config,
        outcome.countries.iter().map(|c| c.report.clone()).collect(),
        outcome.errors.clone(),
    );
    let written = emit_report(&report, &outcome.countries, &config.out_dir)?;
    let plots = emit_plots(&outcome.countries, &config.out_dir)?;
    let models = persist_models(&outcome.countries, &config.out_dir)?;
    println!(
        "{} countries reported, {} failed; {} files in {}",
        outcome.countries.len(),
        outcome.errors.len(),
        written.len() + plots.len() + models.len(),
        config.out_dir.display()
    );
    print_errors(&outcome);
    Ok(exit_for_outcome(&outcome))
}

/// Rebuilds CSVs and charts from a persisted `report.json` and the model
/// documents beside it, without refitting anything.
fn cmd_report(config: &PipelineConfig) -> Result<u8, Error> {
    let report_path = config.out_dir.join("report.json");
    let text = std::fs::read_to_string(&report_path).map_err(|e| {
        Error::Config(format!(
            "cannot read {}: {e}; run the pipeline first",
            report_path.display()
        ))
    })?;
    let report = Report::from_json(&text)?;
    let echo = &report.config_echo;

    let emissions = load_emissions_csv(&echo.emissions_path)?;
    let mut outcomes = Vec::new();
    for country_report in &report.countries {
        let series = emissions
            .iter()
            .find(|s| s.country == country_report.country)
            .ok_or_else(|| {
                Error::Config(format!(
                    "country {} in report.json is missing from {}",
                    country_report.country,
                    echo.emissions_path.display()
                ))
            })?;
        let history = co2cast::preprocess::interpolate_missing(series)?;
        let model_path = config
            .out_dir
            .join("models")
            .join(format!("model_{}.json", country_report.country));
        let model = FittedModel::from_json(&std::fs::read_to_string(&model_path)?)?;
        outcomes.push(CountryOutcome {
            report: country_report.clone(),
            history,
            model,
            benchmark_rows: Vec::new(),
        });
    }

    for outcome in &outcomes {
        co2cast::report::write_forecast_csv(outcome, &config.out_dir)?;
        co2cast::report::write_benchmark_csv(&outcome.report, &config.out_dir)?;
    }
    emit_plots(&outcomes, &config.out_dir)?;
    println!(
        "re-emitted CSVs and charts for {} countries from {}",
        outcomes.len(),
        report_path.display()
    );
    Ok(if report.errors.is_empty() {
        EXIT_OK
    } else if report.countries.is_empty() {
        EXIT_TOTAL_FAILURE
    } else {
        EXIT_PARTIAL
    })
}

fn is_config_error(err: &Error) -> bool {
    matches!(
        err,
        Error::Config(_)
            | Error::Schema { .. }
            | Error::Row { .. }
            | Error::DuplicateKey { .. }
            | Error::UnknownSource { .. }
            | Error::ShareSum { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_)
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = match &cli.command {
        Command::Validate(o)
        | Command::Classify(o)
        | Command::Benchmark(o)
        | Command::Forecast(o)
        | Command::Run(o)
        | Command::Report(o) => o.clone(),
    };

    let config = match build_config(&opts) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("config error: {err}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let result = match &cli.command {
        Command::Validate(_) => cmd_validate(&config),
        Command::Classify(_) => cmd_classify(&config),
        Command::Benchmark(_) => cmd_benchmark(&config),
        Command::Forecast(_) => cmd_forecast(&config),
        Command::Run(_) => cmd_run(&config),
        Command::Report(_) => cmd_report(&config),
    };

    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            if is_config_error(&err) {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_TOTAL_FAILURE)
            }
        }
    }
}
