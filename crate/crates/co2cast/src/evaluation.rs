//! Forecast accuracy metrics, chronological splits, rolling-origin
//! cross-validation, grid search and model ranking.
//!
//! R-squared is computed against the mean of the *test* values. On a
//! near-constant held-out tail this goes strongly negative even when MAPE
//! is small: the predict-the-test-mean baseline scores exactly zero and any
//! prediction with a larger squared error scores below it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AnnualSeries;
use crate::models::{
    fit_arima, fit_holt_winters, fit_sarima, forecast, ArimaOrder, FittedModel, HoltParams,
    HoltSpec, ModelFamily, ModelSpecConfig, SarimaOrder,
};
use crate::stats::mean;

/// The four benchmark metrics. `r2` is `None` when the actual values are
/// constant (zero total sum of squares).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Mean absolute error (Mt).
    pub mae: f64,
    /// Root mean squared error (Mt).
    pub rmse: f64,
    /// Mean absolute percentage error, in percent.
    pub mape: f64,
    /// Coefficient of determination about the test mean; may be negative.
    pub r2: Option<f64>,
}

/// MAE, RMSE, MAPE and R-squared of `predicted` against `actual`.
pub fn compute_metrics(actual: &[f64], predicted: &[f64]) -> Result<Metrics> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(Error::Domain(format!(
            "metric inputs must be equal nonzero lengths ({} vs {})",
            actual.len(),
            predicted.len()
        )));
    }
    if let Some(index) = actual.iter().position(|&a| a == 0.0) {
        return Err(Error::ZeroActual { index });
    }
    let n = actual.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut pct_sum = 0.0;
    for (&a, &p) in actual.iter().zip(predicted) {
        let e = a - p;
        abs_sum += e.abs();
        sq_sum += e * e;
        pct_sum += e.abs() / a.abs();
    }
    let actual_mean = mean(actual);
    let sst: f64 = actual.iter().map(|&a| (a - actual_mean) * (a - actual_mean)).sum();
    let r2 = if sst > 0.0 { Some(1.0 - sq_sum / sst) } else { None };
    Ok(Metrics {
        mae: abs_sum / n,
        rmse: (sq_sum / n).sqrt(),
        mape: 100.0 * pct_sum / n,
        r2,
    })
}

/// Chronological split: train takes the first floor(fraction * n)
/// observations, test the remainder. Never shuffles.
pub fn chrono_split(series: &AnnualSeries, train_fraction: f64) -> Result<(AnnualSeries, AnnualSeries)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "train fraction {train_fraction} outside (0,1)"
        )));
    }
    let n = series.len();
    let train_len = (train_fraction * n as f64).floor() as usize;
    if train_len == 0 || train_len >= n {
        return Err(Error::Domain(format!(
            "degenerate split: {train_len} train / {} test of {n}",
            n - train_len
        )));
    }
    Ok((series.segment(0, train_len), series.segment(train_len, n - train_len)))
}

/// One model configuration a search or backtest can fit.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelCandidate {
    Arima(ArimaOrder),
    Sarima(SarimaOrder),
    HoltWinters(HoltSpec),
}

impl ModelCandidate {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelCandidate::Arima(_) => ModelFamily::Arima,
            ModelCandidate::Sarima(_) => ModelFamily::Sarima,
            ModelCandidate::HoltWinters(_) => ModelFamily::HoltWinters,
        }
    }

    pub fn fit(&self, series: &AnnualSeries) -> Result<FittedModel> {
        match self {
            ModelCandidate::Arima(order) => fit_arima(series, *order),
            ModelCandidate::Sarima(order) => fit_sarima(series, *order),
            ModelCandidate::HoltWinters(spec) => fit_holt_winters(series, *spec),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModelCandidate::Arima(order) => format!("ARIMA{order}"),
            ModelCandidate::Sarima(order) => format!("SARIMA{order}"),
            ModelCandidate::HoltWinters(HoltSpec::Fixed(p)) => format!(
                "HW(alpha={:.2},beta={:.2},phi={:.2})",
                p.alpha, p.beta, p.phi
            ),
            ModelCandidate::HoltWinters(HoltSpec::Optimize { seasonal_period }) => {
                format!("HW(optimize,m={seasonal_period})")
            }
        }
    }
}

/// One expanding-window backtest fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvFold {
    pub train_end_year: i32,
    pub horizon: usize,
    pub metrics: Metrics,
}

/// Rolling-origin cross-validation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// Successful folds in chronological order.
    pub folds: Vec<CvFold>,
    /// Unweighted means of the fold metrics.
    pub aggregate: Metrics,
    /// Folds whose fit or forecast failed, excluded from the aggregate.
    pub failed_folds: usize,
}

/// Expanding-window backtest: for each origin t from `min_train` to
/// n - horizon, fit on the first t observations and score the next
/// `horizon` forecasts against the actuals.
pub fn rolling_origin_cv(
    series: &AnnualSeries,
    candidate: &ModelCandidate,
    min_train: usize,
    horizon: usize,
) -> Result<CvReport> {
    let n = series.len();
    if min_train == 0 || horizon == 0 || min_train + horizon > n {
        return Err(Error::Domain(format!(
            "no feasible origin: min_train {min_train} + horizon {horizon} exceeds length {n}"
        )));
    }

    let mut folds = Vec::new();
    let mut failed_folds = 0;
    for t in min_train..=(n - horizon) {
        let train = series.segment(0, t);
        let outcome = candidate
            .fit(&train)
            .and_then(|model| forecast(&model, horizon, 0.95, 0))
            .and_then(|path| compute_metrics(&series.values[t..t + horizon], &path.points));
        match outcome {
            Ok(metrics) => folds.push(CvFold {
                train_end_year: series.year_at(t - 1),
                horizon,
                metrics,
            }),
            Err(_) => failed_folds += 1,
        }
    }
    if folds.is_empty() {
        return Err(Error::ExhaustiveFailure {
            causes: vec![format!(
                "all {failed_folds} folds failed for {}",
                candidate.describe()
            )],
        });
    }

    let aggregate = Metrics {
        mae: mean(&folds.iter().map(|f| f.metrics.mae).collect::<Vec<_>>()),
        rmse: mean(&folds.iter().map(|f| f.metrics.rmse).collect::<Vec<_>>()),
        mape: mean(&folds.iter().map(|f| f.metrics.mape).collect::<Vec<_>>()),
        r2: {
            let defined: Vec<f64> = folds.iter().filter_map(|f| f.metrics.r2).collect();
            if defined.is_empty() { None } else { Some(mean(&defined)) }
        },
    };
    Ok(CvReport {
        folds,
        aggregate,
        failed_folds,
    })
}

/// Advisory residual and stability diagnostics. Surfaced alongside the
/// ranking but never reorder it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDiagnostics {
    /// Ljung-Box statistic over the first `ljung_box_lags` residual
    /// autocorrelations, absent when too few residuals exist.
    pub ljung_box_stat: Option<f64>,
    pub ljung_box_lags: usize,
    /// Ljung-Box exceeded the 5% chi-square critical value.
    pub residual_autocorrelation: bool,
    /// The 10-step point forecast exceeds 3x the last observation.
    pub forecast_divergence: bool,
}

// chi-square 95th percentiles, 1..=10 degrees of freedom
const CHI2_95: [f64; 10] = [
    3.841, 5.991, 7.815, 9.488, 11.070, 12.592, 14.067, 15.507, 16.919, 18.307,
];

fn diagnostics(model: &FittedModel, last_observation: f64) -> Result<ModelDiagnostics> {
    let resid = &model.residuals;
    let n = resid.len();
    let lags = (n / 5).min(10).max(1);
    let (stat, autocorrelated) = if n > lags + 1 {
        let centered: Vec<f64> = {
            let m = mean(resid);
            resid.iter().map(|r| r - m).collect()
        };
        let denom: f64 = centered.iter().map(|r| r * r).sum();
        if denom <= 0.0 {
            (None, false)
        } else {
            let nf = n as f64;
            let mut q = 0.0;
            for k in 1..=lags {
                let rk: f64 = centered[k..]
                    .iter()
                    .zip(&centered[..n - k])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    / denom;
                q += rk * rk / (nf - k as f64);
            }
            q *= nf * (nf + 2.0);
            (Some(q), q > CHI2_95[lags - 1])
        }
    } else {
        (None, false)
    };

    let path = forecast(model, 10, 0.95, 0)?;
    let forecast_divergence = path.points[9] > 3.0 * last_observation;

    Ok(ModelDiagnostics {
        ljung_box_stat: stat,
        ljung_box_lags: lags,
        residual_autocorrelation: autocorrelated,
        forecast_divergence,
    })
}

/// One family's benchmark outcome: the winning configuration with its
/// held-out test metrics and the winner's cross-validation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub family: ModelFamily,
    pub config: ModelSpecConfig,
    pub test_metrics: Metrics,
    pub cv_metrics: Metrics,
    pub diagnostics: Option<ModelDiagnostics>,
}

/// Grid-search result, with any skipped configurations and their causes.
#[derive(Debug, Clone)]
pub struct GridSearchOutcome {
    pub row: BenchmarkRow,
    /// (configuration, cause) for candidates that failed to fit or score.
    pub skipped: Vec<(String, String)>,
}

/// Penalized in-sample score for within-family tuning: the CSS-Gaussian
/// log-likelihood term with a BIC-strength ln(n) parameter penalty.
fn tuning_score(model: &FittedModel) -> f64 {
    let n_eff = model.residuals.len().max(1) as f64;
    let k = model.order_or_params.param_count() as f64;
    n_eff * model.sigma2.ln() + n_eff.ln() * k
}

/// Tunes one family: every candidate is fitted on the chronological train
/// segment and the configuration with the lowest penalized in-sample score
/// wins (exact ties: fewer parameters, lower complexity, grid position).
/// The winner is then scored on the held-out tail with one multi-step
/// forecast — those test metrics are what [`select_best`] ranks across
/// families — and backtested with expanding-window CV at horizon 1 from a
/// 2/3 origin.
///
/// In-sample scoring rather than held-out RMSE does the within-family
/// tuning: on a short tail the RMSE differences between neighboring orders
/// sit below sampling noise, so ranking by them rewards overfit
/// configurations as often as not. The ln(n) penalty is deliberately
/// stiffer than AIC's 2k because conditional-sum-of-squares ARMA fits can
/// carve out spurious variance through near-cancelling AR/MA factors.
pub fn grid_search(
    series: &AnnualSeries,
    grid: &[ModelCandidate],
    train_fraction: f64,
) -> Result<GridSearchOutcome> {
    if grid.is_empty() {
        return Err(Error::Domain("empty candidate grid".into()));
    }
    let family = grid[0].family();
    if grid.iter().any(|c| c.family() != family) {
        return Err(Error::Domain("grid mixes model families".into()));
    }

    let (train, test) = chrono_split(series, train_fraction)?;
    let mut skipped = Vec::new();
    let mut fitted: Vec<(usize, FittedModel)> = Vec::new();
    for (idx, candidate) in grid.iter().enumerate() {
        match candidate.fit(&train) {
            Ok(model) => fitted.push((idx, model)),
            Err(err) => skipped.push((candidate.describe(), err.to_string())),
        }
    }
    if fitted.is_empty() {
        return Err(Error::ExhaustiveFailure {
            causes: skipped.into_iter().map(|(c, e)| format!("{c}: {e}")).collect(),
        });
    }

    let (winner_idx, winner_model) = fitted
        .into_iter()
        .min_by(|(ai, am), (bi, bm)| {
            tuning_score(am)
                .total_cmp(&tuning_score(bm))
                .then_with(|| {
                    am.order_or_params
                        .param_count()
                        .cmp(&bm.order_or_params.param_count())
                })
                .then_with(|| {
                    am.order_or_params
                        .complexity()
                        .cmp(&bm.order_or_params.complexity())
                })
                .then_with(|| ai.cmp(bi))
        })
        .expect("non-empty fitted set");

    let path = forecast(&winner_model, test.len(), 0.95, 0)?;
    let test_metrics = compute_metrics(&test.values, &path.points)?;

    let min_train = (2 * series.len() / 3).max(1);
    let cv = rolling_origin_cv(series, &grid[winner_idx], min_train, 1)?;
    let last_observation = *train.values.last().expect("non-empty train");
    let diag = diagnostics(&winner_model, last_observation)?;

    Ok(GridSearchOutcome {
        row: BenchmarkRow {
            family,
            config: winner_model.order_or_params.clone(),
            test_metrics,
            cv_metrics: cv.aggregate,
            diagnostics: Some(diag),
        },
        skipped,
    })
}

/// Ranks rows by test RMSE ascending with MAE then MAPE tie-breaks. The
/// ordering is a deterministic total order; diagnostics ride along without
/// influencing it.
pub fn select_best(rows: Vec<BenchmarkRow>) -> Result<Vec<BenchmarkRow>> {
    if rows.is_empty() {
        return Err(Error::Domain("no benchmark rows to rank".into()));
    }
    let mut ranked = rows;
    ranked.sort_by(|a, b| {
        a.test_metrics
            .rmse
            .total_cmp(&b.test_metrics.rmse)
            .then_with(|| a.test_metrics.mae.total_cmp(&b.test_metrics.mae))
            .then_with(|| a.test_metrics.mape.total_cmp(&b.test_metrics.mape))
    });
    Ok(ranked)
}

/// Default ARIMA grid: p, q in {0,1,2}, d in {0,1,2}, enumerated with d
/// outermost so positional tie-breaks prefer less differencing.
pub fn default_arima_grid() -> Vec<ModelCandidate> {
    let mut grid = Vec::with_capacity(27);
    for d in 0..=2 {
        for p in 0..=2 {
            for q in 0..=2 {
                grid.push(ModelCandidate::Arima(ArimaOrder { p, d, q }));
            }
        }
    }
    grid
}

/// Default SARIMA grid. With period 1 it degenerates to the ARIMA grid
/// shape; otherwise P, Q in {0,1,2} and D in {0,1} multiply in, seasonal
/// terms innermost so positional tie-breaks prefer non-seasonal configs.
pub fn default_sarima_grid(period: usize) -> Vec<ModelCandidate> {
    let mut grid = Vec::new();
    for d in 0..=2 {
        for p in 0..=2 {
            for q in 0..=2 {
                let base = ArimaOrder { p, d, q };
                if period <= 1 {
                    grid.push(ModelCandidate::Sarima(SarimaOrder::from_arima(base)));
                } else {
                    for sd in 0..=1 {
                        for sp in 0..=2 {
                            for sq in 0..=2 {
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

/// Default Holt-Winters grid: alpha and beta on a 0.05-step lattice with
/// phi in {0.8, 0.9, 0.98, 1.0}, all as fixed-parameter candidates.
pub fn default_holt_grid() -> Vec<ModelCandidate> {
    let mut grid = Vec::new();
    for ai in 1..=19 {
        let alpha = ai as f64 * 0.05;
        for bi in 0..=19 {
            let beta = bi as f64 * 0.05;
            for phi in [0.8, 0.9, 0.98, 1.0] {
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

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series_from(values: Vec<f64>) -> AnnualSeries {
        let start = 2023 - values.len() as i32 + 1;
        AnnualSeries::new("TST", start, values)
    }

    fn row(family: ModelFamily, mae: f64, rmse: f64, r2: f64, mape: f64) -> BenchmarkRow {
        BenchmarkRow {
            family,
            config: ModelSpecConfig::Arima {
                order: ArimaOrder { p: 0, d: 0, q: 0 },
            },
            test_metrics: Metrics {
                mae,
                rmse,
                mape,
                r2: Some(r2),
            },
            cv_metrics: Metrics {
                mae,
                rmse,
                mape,
                r2: Some(r2),
            },
            diagnostics: None,
        }
    }

    #[test]
    fn perfect_forecast_metrics() {
        let xs = vec![3.0, 1.0, 4.0, 1.5];
        let m = compute_metrics(&xs, &xs).unwrap();
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mape, 0.0);
        assert_eq!(m.r2, Some(1.0));
    }

    #[test]
    fn hand_computed_metrics_case() {
        let m = compute_metrics(&[100.0, 110.0], &[90.0, 120.0]).unwrap();
        assert!((m.mae - 10.0).abs() < 1e-12);
        assert!((m.rmse - 10.0).abs() < 1e-12);
        assert!((m.mape - 9.5455).abs() < 1e-3);
        assert!((m.r2.unwrap() + 3.0).abs() < 1e-9);
    }

    #[test]
    fn length_mismatch_is_domain_error() {
        assert!(matches!(
            compute_metrics(&[1.0, 2.0], &[1.0]),
            Err(Error::Domain(_))
        ));
        assert!(compute_metrics(&[], &[]).is_err());
    }

    #[test]
    fn zero_actual_names_the_index() {
        assert!(matches!(
            compute_metrics(&[1.0, 0.0, 2.0], &[1.0, 1.0, 2.0]),
            Err(Error::ZeroActual { index: 1 })
        ));
    }

    #[test]
    fn constant_actual_leaves_r2_undefined() {
        let m = compute_metrics(&[5.0, 5.0, 5.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(m.r2, None);
        assert!(m.mae > 0.0);
    }

    #[test]
    fn split_follows_floor_rule() {
        let series = series_from((0..24).map(f64::from).map(|v| v + 1.0).collect());
        let (train, test) = chrono_split(&series, 0.8).unwrap();
        assert_eq!(train.len(), 19);
        assert_eq!(test.len(), 5);
        assert_eq!(test.start_year, train.last_year() + 1);

        let series10 = series_from((1..=10).map(f64::from).collect());
        let (train5, test5) = chrono_split(&series10, 0.5).unwrap();
        assert_eq!((train5.len(), test5.len()), (5, 5));

        let tiny = series_from(vec![1.0, 2.0]);
        assert!(matches!(chrono_split(&tiny, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn cv_fold_counts() {
        let series = series_from((0..24).map(|t| 10.0 + t as f64).collect());
        let candidate = ModelCandidate::HoltWinters(HoltSpec::Fixed(
            HoltParams::trend(0.5, 0.1, 1.0).unwrap(),
        ));
        let report = rolling_origin_cv(&series, &candidate, 16, 1).unwrap();
        assert_eq!(report.folds.len(), 8);
        assert_eq!(report.failed_folds, 0);
        assert_eq!(report.folds[0].train_end_year, series.year_at(15));
        assert_eq!(report.folds[7].train_end_year, series.year_at(22));

        let single = rolling_origin_cv(&series, &candidate, 16, 8).unwrap();
        assert_eq!(single.folds.len(), 1);

        assert!(matches!(
            rolling_origin_cv(&series, &candidate, 20, 8),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn holt_is_exact_on_linear_series_under_cv() {
        let series = series_from((1..=14).map(|t| 5.0 + 2.0 * t as f64).collect());
        let candidate = ModelCandidate::HoltWinters(HoltSpec::Optimize { seasonal_period: 1 });
        let report = rolling_origin_cv(&series, &candidate, 5, 2).unwrap();
        assert!(report.aggregate.mae < 1e-6, "mae = {}", report.aggregate.mae);
    }

    #[test]
    fn singleton_grid_wins_by_default() {
        let values: Vec<f64> = (0..20).map(|t| 50.0 + (t % 4) as f64).collect();
        let series = series_from(values);
        let grid = vec![ModelCandidate::Arima(ArimaOrder { p: 0, d: 0, q: 0 })];
        let outcome = grid_search(&series, &grid, 0.8).unwrap();
        assert_eq!(
            outcome.row.config,
            ModelSpecConfig::Arima {
                order: ArimaOrder { p: 0, d: 0, q: 0 }
            }
        );
        assert!(outcome.skipped.is_empty());
    }

    #[test]
    fn empty_grid_is_rejected() {
        let series = series_from((0..20).map(f64::from).collect());
        assert!(matches!(
            grid_search(&series, &[], 0.8),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn white_noise_grid_prefers_parsimony() {
        // restricted grid p,q in {0,1,2}, d in {0,1}
        let mut grid = Vec::new();
        for d in 0..=1 {
            for p in 0..=2 {
                for q in 0..=2 {
                    grid.push(ModelCandidate::Arima(ArimaOrder { p, d, q }));
                }
            }
        }
        let mut parsimonious = 0;
        for seed in 0..100 {
            let data = crate::models::simulate_arma(
                ArimaOrder { p: 0, d: 0, q: 0 },
                &[],
                &[],
                1.0,
                200,
                1000 + seed,
            )
            .unwrap();
            let series = series_from(data.iter().map(|v| v + 100.0).collect());
            let outcome = grid_search(&series, &grid, 0.8).unwrap();
            if let ModelSpecConfig::Arima { order } = outcome.row.config {
                if order.p + order.q <= 1 {
                    parsimonious += 1;
                }
            }
        }
        assert!(parsimonious >= 80, "only {parsimonious}/100 parsimonious winners");
    }

    #[test]
    fn ar_structure_is_detected_by_grid() {
        let grid = default_arima_grid();
        let mut with_ar_term = 0;
        for seed in 0..100 {
            let data = crate::models::simulate_arma(
                ArimaOrder { p: 1, d: 0, q: 0 },
                &[0.7],
                &[],
                1.0,
                200,
                5000 + seed,
            )
            .unwrap();
            let series = series_from(data.iter().map(|v| v + 100.0).collect());
            let outcome = grid_search(&series, &grid, 0.8).unwrap();
            if let ModelSpecConfig::Arima { order } = outcome.row.config {
                if order.p >= 1 {
                    with_ar_term += 1;
                }
            }
        }
        assert!(with_ar_term >= 90, "only {with_ar_term}/100 winners kept an AR term");
    }

    #[test]
    fn select_best_reproduces_published_rankings() {
        // Nigeria-shaped metrics: Holt-Winters should lead
        let nigeria = vec![
            row(ModelFamily::Arima, 11.95, 14.20, 0.617, 9.37),
            row(ModelFamily::Sarima, 12.02, 14.27, 0.613, 9.41),
            row(ModelFamily::HoltWinters, 8.31, 9.84, 0.803, 6.35),
        ];
        let ranked = select_best(nigeria).unwrap();
        assert_eq!(ranked[0].family, ModelFamily::HoltWinters);

        // Russia-shaped metrics: SARIMA leads despite negative R-squared
        let russia = vec![
            row(ModelFamily::Arima, 51.07, 59.17, -2.195, 3.07),
            row(ModelFamily::Sarima, 50.98, 59.11, -2.188, 3.07),
            row(ModelFamily::HoltWinters, 53.78, 61.37, -2.437, 3.23),
        ];
        let ranked = select_best(russia).unwrap();
        assert_eq!(ranked[0].family, ModelFamily::Sarima);
        assert_eq!(ranked[1].family, ModelFamily::Arima);
    }

    #[test]
    fn single_row_passes_through() {
        let rows = vec![row(ModelFamily::Arima, 1.0, 1.0, 0.5, 1.0)];
        let ranked = select_best(rows.clone()).unwrap();
        assert_eq!(ranked, rows);
        assert!(select_best(Vec::new()).is_err());
    }

    #[test]
    fn default_grids_have_documented_shapes() {
        assert_eq!(default_arima_grid().len(), 27);
        assert_eq!(default_sarima_grid(1).len(), 27);
        assert_eq!(default_sarima_grid(4).len(), 27 * 18);
        assert_eq!(default_holt_grid().len(), 19 * 20 * 4);
    }

    proptest! {
        #[test]
        fn mae_never_exceeds_rmse(
            pairs in proptest::collection::vec((1.0f64..1e3, -1e3f64..1e3), 1..50)
        ) {
            let actual: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
            let predicted: Vec<f64> = pairs.iter().map(|(_, p)| *p).collect();
            let m = compute_metrics(&actual, &predicted).unwrap();
            prop_assert!(m.mae <= m.rmse + 1e-12);
            if let Some(r2) = m.r2 {
                prop_assert!(r2 <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn metrics_are_order_invariant(
            pairs in proptest::collection::vec((1.0f64..1e3, -1e3f64..1e3), 2..30),
            seed in 0u64..1000,
        ) {
            let actual: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
            let predicted: Vec<f64> = pairs.iter().map(|(_, p)| *p).collect();
            let base = compute_metrics(&actual, &predicted).unwrap();

            // deterministic shuffle of the index set
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            let mut state = seed.wrapping_add(1);
            for i in (1..order.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                order.swap(i, (state >> 33) as usize % (i + 1));
            }
            let shuffled_actual: Vec<f64> = order.iter().map(|&i| actual[i]).collect();
            let shuffled_predicted: Vec<f64> = order.iter().map(|&i| predicted[i]).collect();
            let shuffled = compute_metrics(&shuffled_actual, &shuffled_predicted).unwrap();

            prop_assert!((base.mae - shuffled.mae).abs() < 1e-9);
            prop_assert!((base.rmse - shuffled.rmse).abs() < 1e-9);
            prop_assert!((base.mape - shuffled.mape).abs() < 1e-9);
        }

        #[test]
        fn test_mean_baseline_scores_zero(
            actual in proptest::collection::vec(1.0f64..1e3, 3..30)
        ) {
            let m = mean(&actual);
            prop_assume!(actual.iter().any(|&a| (a - m).abs() > 1e-9));
            let baseline = vec![m; actual.len()];
            let metrics = compute_metrics(&actual, &baseline).unwrap();
            prop_assert!(metrics.r2.unwrap().abs() < 1e-9);

            // tripling every deviation gives SSE = 9 SST, so r2 = -8
            let worse: Vec<f64> = actual.iter().map(|&a| 3.0 * m - 2.0 * a).collect();
            let worse_metrics = compute_metrics(&actual, &worse).unwrap();
            prop_assert!((worse_metrics.r2.unwrap() + 8.0).abs() < 1e-6);
        }

        #[test]
        fn split_partitions_the_series(
            values in proptest::collection::vec(0.0f64..1e4, 2..60),
            fraction in 0.05f64..0.95,
        ) {
            let series = series_from(values.clone());
            if let Ok((train, test)) = chrono_split(&series, fraction) {
                let mut merged = train.values.clone();
                merged.extend_from_slice(&test.values);
                prop_assert_eq!(merged, values);
                prop_assert_eq!(train.start_year, series.start_year);
                prop_assert_eq!(test.last_year(), series.last_year());
            }
        }
    }
}
