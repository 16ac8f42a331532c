//! Holt-Winters exponential smoothing with additive damped trend and an
//! optional additive seasonal component.
//!
//! Annual emission series carry no intra-year season, so the default setup
//! is the non-seasonal damped-trend form. The `Optimize` spec searches a
//! 0.05-step lattice over alpha and beta with phi in {0.8, 0.9, 0.98, 1.0}
//! (gamma joins the lattice when a seasonal period is set), minimizing the
//! in-sample one-step sum of squared errors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ingest::AnnualSeries;
use crate::models::{
    Coefficients, FitState, FittedModel, ForecastPath, HoltParams, ModelFamily, ModelSpecConfig,
};
use crate::stats::quantile_type7;

const SIGMA2_FLOOR: f64 = 1e-30;
/// Sample paths drawn for the interval simulation.
const SIMULATION_PATHS: usize = 1000;
/// Damping grid used by the lattice search.
pub(crate) const PHI_GRID: [f64; 4] = [0.8, 0.9, 0.98, 1.0];

/// Fixed parameters, or a bounded lattice search over them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoltSpec {
    Fixed(HoltParams),
    Optimize { seasonal_period: usize },
}

struct SmoothingRun {
    level: f64,
    trend: f64,
    seasonal: Vec<f64>,
    residuals: Vec<f64>,
    sse: f64,
}

/// Runs the smoothing recursions over the whole series.
///
/// Initial level is the first observation; initial trend is the mean of the
/// first min(4, n-1) first-differences; seasonal indices start as first-season
/// deviations from the first-season mean.
fn run_smoothing(values: &[f64], params: &HoltParams) -> SmoothingRun {
    let n = values.len();
    let m = params.seasonal_period;
    let mut level = values[0];
    let k = 4.min(n - 1);
    let mut trend = values
        .windows(2)
        .take(k)
        .map(|w| w[1] - w[0])
        .sum::<f64>()
        / k as f64;
    let mut seasonal = if m > 1 {
        let season_mean = values[..m].iter().sum::<f64>() / m as f64;
        (0..m).map(|j| values[j] - season_mean).collect()
    } else {
        vec![0.0]
    };

    let mut residuals = Vec::with_capacity(n - 1);
    let mut sse = 0.0;
    for (t, &y) in values.iter().enumerate().skip(1) {
        let sidx = t % m.max(1);
        let predicted = level + params.phi * trend + seasonal[sidx];
        let e = y - predicted;
        residuals.push(e);
        sse += e * e;

        let new_level =
            params.alpha * (y - seasonal[sidx]) + (1.0 - params.alpha) * (level + params.phi * trend);
        trend = params.beta * (new_level - level) + (1.0 - params.beta) * params.phi * trend;
        if m > 1 {
            seasonal[sidx] = params.gamma * (y - new_level) + (1.0 - params.gamma) * seasonal[sidx];
        }
        level = new_level;
    }

    SmoothingRun {
        level,
        trend,
        seasonal,
        residuals,
        sse,
    }
}

fn lattice(step: f64, from: f64, to: f64) -> impl Iterator<Item = f64> {
    let count = ((to - from) / step).round() as usize;
    (0..=count).map(move |i| from + i as f64 * step)
}

/// Fits Holt-Winters smoothing. `Fixed` evaluates the given parameters;
/// `Optimize` picks the lattice point with the smallest in-sample SSE.
pub fn fit_holt_winters(series: &AnnualSeries, spec: HoltSpec) -> Result<FittedModel> {
    super::check_trainable(series)?;
    let n = series.len();
    let seasonal_period = match &spec {
        HoltSpec::Fixed(params) => {
            params.validate()?;
            params.seasonal_period
        }
        HoltSpec::Optimize { seasonal_period } => {
            if *seasonal_period == 0 {
                return Err(Error::Domain("seasonal period must be at least 1".into()));
            }
            *seasonal_period
        }
    };
    let required = if seasonal_period > 1 {
        2 * seasonal_period
    } else {
        4
    };
    if n < required {
        return Err(Error::InsufficientData {
            required,
            actual: n,
        });
    }

    let params = match spec {
        HoltSpec::Fixed(params) => params,
        HoltSpec::Optimize { seasonal_period } => {
            let mut best: Option<(f64, HoltParams)> = None;
            let gammas: Vec<f64> = if seasonal_period > 1 {
                lattice(0.05, 0.0, 0.95).collect()
            } else {
                vec![0.0]
            };
            for alpha in lattice(0.05, 0.05, 0.95) {
                for beta in lattice(0.05, 0.0, 0.95) {
                    for &phi in &PHI_GRID {
                        for &gamma in &gammas {
                            let candidate = HoltParams {
                                alpha,
                                beta,
                                phi,
                                seasonal_period,
                                gamma,
                            };
                            let sse = run_smoothing(&series.values, &candidate).sse;
                            if best.as_ref().is_none_or(|(b, _)| sse < *b) {
                                best = Some((sse, candidate));
                            }
                        }
                    }
                }
            }
            best.expect("non-empty lattice").1
        }
    };

    let run = run_smoothing(&series.values, &params);
    let k = 3 + usize::from(params.seasonal_period > 1);
    let denom = (n.saturating_sub(k)).max(1) as f64;
    let sigma2 = (run.sse / denom).max(SIGMA2_FLOOR);
    let n_resid = run.residuals.len() as f64;
    let aic = n_resid * sigma2.ln() + 2.0 * k as f64;
    let loglik_approx = -0.5 * n_resid * ((2.0 * std::f64::consts::PI).ln() + sigma2.ln() + 1.0);

    Ok(FittedModel {
        family: ModelFamily::HoltWinters,
        order_or_params: ModelSpecConfig::HoltWinters { params },
        coefficients: Coefficients::Smoothing {
            level: run.level,
            trend: run.trend,
            seasonal: run.seasonal,
        },
        mean_or_intercept: run.level,
        sigma2,
        n_obs: n,
        loglik_approx,
        aic,
        residuals: run.residuals,
        last_obs_year: series.last_year(),
        state: FitState::Holt,
    })
}

/// One-step-ahead predictions over an extension of the training series:
/// the smoothing recursions re-run with the fitted parameters across the
/// full values, predictions read off for the extension positions.
pub(crate) fn one_step_holt(model: &FittedModel, full_values: &[f64]) -> Result<Vec<f64>> {
    let params = match &model.order_or_params {
        ModelSpecConfig::HoltWinters { params } => *params,
        _ => return Err(Error::Domain("smoothing filter on an ARMA model".into())),
    };
    let n_train = model.n_obs;
    if full_values.len() <= n_train {
        return Err(Error::Domain(
            "filter input must extend the training series".into(),
        ));
    }
    let run = run_smoothing(full_values, &params);
    // residuals[t-1] belongs to position t
    Ok((n_train..full_values.len())
        .map(|t| full_values[t] - run.residuals[t - 1])
        .collect())
}

/// Damped-trend extrapolation with simulation-based intervals.
pub(crate) fn forecast_holt(
    model: &FittedModel,
    horizon: usize,
    level: f64,
    seed: u64,
) -> Result<ForecastPath> {
    let params = match &model.order_or_params {
        ModelSpecConfig::HoltWinters { params } => *params,
        _ => return Err(Error::Domain("smoothing forecast on an ARMA model".into())),
    };
    let (level_state, trend_state, seasonal_state) = match &model.coefficients {
        Coefficients::Smoothing {
            level,
            trend,
            seasonal,
        } => (*level, *trend, seasonal.clone()),
        _ => return Err(Error::Domain("smoothing forecast on ARMA coefficients".into())),
    };
    let m = params.seasonal_period.max(1);
    // season slot of the last training observation
    let t_last = model.n_obs - 1;

    let mut points = Vec::with_capacity(horizon);
    let mut damp_sum = 0.0;
    let mut damp = 1.0;
    for h in 1..=horizon {
        damp *= params.phi;
        damp_sum += damp;
        let sidx = (t_last + h) % m;
        points.push(level_state + damp_sum * trend_state + seasonal_state[sidx]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, model.sigma2.sqrt())
        .map_err(|e| Error::Domain(format!("invalid innovation scale: {e}")))?;
    let mut samples = vec![Vec::with_capacity(SIMULATION_PATHS); horizon];
    for _ in 0..SIMULATION_PATHS {
        let mut l = level_state;
        let mut b = trend_state;
        let mut seas = seasonal_state.clone();
        for (h, column) in samples.iter_mut().enumerate() {
            let sidx = (t_last + h + 1) % m;
            let predicted = l + params.phi * b + seas[sidx];
            let y = predicted + noise.sample(&mut rng);
            column.push(y);
            let new_level = params.alpha * (y - seas[sidx]) + (1.0 - params.alpha) * (l + params.phi * b);
            b = params.beta * (new_level - l) + (1.0 - params.beta) * params.phi * b;
            if m > 1 {
                seas[sidx] = params.gamma * (y - new_level) + (1.0 - params.gamma) * seas[sidx];
            }
            l = new_level;
        }
    }

    let tail = (1.0 - level) / 2.0;
    let mut lower = Vec::with_capacity(horizon);
    let mut upper = Vec::with_capacity(horizon);
    for (h, column) in samples.iter_mut().enumerate() {
        column.sort_by(f64::total_cmp);
        let lo = quantile_type7(column, tail);
        let hi = quantile_type7(column, 1.0 - tail);
        lower.push(lo.min(points[h]));
        upper.push(hi.max(points[h]));
    }

    Ok(ForecastPath {
        start_year: model.last_obs_year + 1,
        points,
        lower,
        upper,
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::forecast;

    fn linear_series() -> AnnualSeries {
        // value(t) = 5 + 2t for t = 1..10
        AnnualSeries::new("TST", 2014, (1..=10).map(|t| 5.0 + 2.0 * t as f64).collect())
    }

    #[test]
    fn linear_series_is_fit_exactly() {
        let model = fit_holt_winters(&linear_series(), HoltSpec::Optimize { seasonal_period: 1 }).unwrap();
        for (i, e) in model.residuals.iter().enumerate() {
            assert!(e.abs() < 1e-6, "residual {e} at {i}");
        }
        match &model.order_or_params {
            ModelSpecConfig::HoltWinters { params } => assert_eq!(params.phi, 1.0),
            _ => unreachable!(),
        }
        match &model.coefficients {
            Coefficients::Smoothing { level, trend, .. } => {
                assert!((level - 25.0).abs() < 1e-9);
                assert!((trend - 2.0).abs() < 1e-9);
            }
            _ => unreachable!(),
        }
        let path = forecast(&model, 35, 0.95, 1).unwrap();
        for h in 1..=35usize {
            let expected = 25.0 + 2.0 * h as f64;
            assert!(
                (path.points[h - 1] - expected).abs() < 1e-6,
                "h={h}: {} vs {expected}",
                path.points[h - 1]
            );
        }
    }

    #[test]
    fn constant_series_has_flat_states() {
        let series = AnnualSeries::new("TST", 2000, vec![10.0; 8]);
        let model = fit_holt_winters(&series, HoltSpec::Optimize { seasonal_period: 1 }).unwrap();
        match &model.coefficients {
            Coefficients::Smoothing { level, trend, .. } => {
                assert!((level - 10.0).abs() < 1e-12);
                assert!(trend.abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn damped_trend_recovers_phi_in_range() {
        // damped-trend generator: trend decays by phi = 0.9 each step
        let mut level = 50.0;
        let mut trend = 4.0;
        let mut values = Vec::with_capacity(40);
        values.push(level);
        for t in 1..40 {
            level += trend;
            trend *= 0.9;
            // small deterministic ripple so the fit is not exact
            values.push(level + 0.05 * ((t * 13 % 7) as f64 - 3.0));
        }
        let series = AnnualSeries::new("TST", 1984, values);
        let model = fit_holt_winters(&series, HoltSpec::Optimize { seasonal_period: 1 }).unwrap();
        match &model.order_or_params {
            ModelSpecConfig::HoltWinters { params } => {
                assert!((0.8..=1.0).contains(&params.phi), "phi = {}", params.phi);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn undamped_point_forecasts_extend_the_trend() {
        let series = linear_series();
        let params = HoltParams::trend(0.5, 0.2, 1.0).unwrap();
        let model = fit_holt_winters(&series, HoltSpec::Fixed(params)).unwrap();
        let path = forecast(&model, 5, 0.95, 9).unwrap();
        assert!((path.points[0] - 27.0).abs() < 1e-9);
        assert!((path.points[4] - 35.0).abs() < 1e-9);
    }

    #[test]
    fn short_series_is_insufficient() {
        let series = AnnualSeries::new("TST", 2000, vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            fit_holt_winters(&series, HoltSpec::Optimize { seasonal_period: 1 }),
            Err(Error::InsufficientData { required: 4, actual: 3 })
        ));
        let seasonal = AnnualSeries::new("TST", 2000, vec![1.0; 7]);
        assert!(matches!(
            fit_holt_winters(&seasonal, HoltSpec::Optimize { seasonal_period: 4 }),
            Err(Error::InsufficientData { required: 8, actual: 7 })
        ));
    }

    #[test]
    fn seasonal_component_tracks_a_cycle() {
        // period-4 sawtooth on a gentle upward slope
        let cycle = [4.0, -1.0, -2.0, -1.0];
        let values: Vec<f64> = (0..32)
            .map(|t| 100.0 + 0.5 * t as f64 + cycle[t % 4])
            .collect();
        let series = AnnualSeries::new("TST", 1992, values);
        let model = fit_holt_winters(&series, HoltSpec::Optimize { seasonal_period: 4 }).unwrap();
        let path = forecast(&model, 8, 0.95, 5).unwrap();
        // forecast must keep the 4-step ripple: peaks every 4 steps
        for h in 0..8 {
            let expected = 100.0 + 0.5 * (32 + h) as f64 + cycle[(32 + h) % 4];
            assert!(
                (path.points[h] - expected).abs() < 1.0,
                "h={h}: {} vs {expected}",
                path.points[h]
            );
        }
    }

    #[test]
    fn one_step_filter_tracks_a_linear_extension() {
        let full: Vec<f64> = (1..=16).map(|t| 5.0 + 2.0 * t as f64).collect();
        let train = AnnualSeries::new("TST", 2008, full[..10].to_vec());
        let model = fit_holt_winters(&train, HoltSpec::Fixed(HoltParams::trend(0.5, 0.3, 1.0).unwrap())).unwrap();
        let predictions = crate::models::one_step_predictions(&model, &full).unwrap();
        assert_eq!(predictions.len(), 6);
        for (i, pred) in predictions.iter().enumerate() {
            assert!((pred - full[10 + i]).abs() < 1e-9, "step {i}: {pred}");
        }
    }

    #[test]
    fn interval_simulation_is_seed_deterministic() {
        let series = linear_series();
        let model = fit_holt_winters(&series, HoltSpec::Fixed(HoltParams::trend(0.4, 0.1, 0.9).unwrap())).unwrap();
        let a = forecast(&model, 6, 0.95, 123).unwrap();
        let b = forecast(&model, 6, 0.95, 123).unwrap();
        assert_eq!(a, b);
        let c = forecast(&model, 6, 0.95, 124).unwrap();
        assert_ne!(a.lower, c.lower);
    }

    #[test]
    fn intervals_have_positive_width_with_positive_variance() {
        let values: Vec<f64> = (0..20).map(|t| 100.0 + t as f64 + ((t % 3) as f64)).collect();
        let series = AnnualSeries::new("TST", 2004, values);
        let model = fit_holt_winters(&series, HoltSpec::Optimize { seasonal_period: 1 }).unwrap();
        assert!(model.sigma2 > 0.0);
        let path = forecast(&model, 10, 0.95, 77).unwrap();
        for h in 0..10 {
            assert!(path.upper[h] > path.lower[h]);
        }
    }
}
