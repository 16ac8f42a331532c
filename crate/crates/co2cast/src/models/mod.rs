//! Time-series models: ARIMA, seasonal ARIMA and damped Holt-Winters
//! exponential smoothing, with multi-step forecasts and 95% prediction
//! intervals.
//!
//! ARMA parameters are estimated by conditional sum of squares with the
//! intercept profiled out; stationarity and invertibility are enforced by a
//! bijective partial-autocorrelation reparameterization, so the optimizer
//! searches an unconstrained space. Fitting is deterministic given the
//! series and order; only Holt-Winters interval simulation consumes a seed.

mod arima;
mod holt;
mod optim;
mod simulate;

pub use arima::{fit_arima, fit_sarima};
pub use holt::{fit_holt_winters, HoltSpec};
pub use simulate::simulate_arma;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-seasonal ARIMA(p, d, q) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArimaOrder {
    /// AR order.
    pub p: usize,
    /// Differencing order.
    pub d: usize,
    /// MA order.
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        let order = ArimaOrder { p, d, q };
        order.validate()?;
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d > 2 {
            return Err(Error::Domain(format!("differencing order {} exceeds 2", self.d)));
        }
        if self.p > 5 || self.q > 5 {
            return Err(Error::Domain(format!(
                "AR/MA orders ({}, {}) exceed 5",
                self.p, self.q
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

/// Multiplicative seasonal order (p,d,q)(P,D,Q)[s].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SarimaOrder {
    pub base: ArimaOrder,
    /// Seasonal AR order P.
    pub seasonal_p: usize,
    /// Seasonal differencing order D.
    pub seasonal_d: usize,
    /// Seasonal MA order Q.
    pub seasonal_q: usize,
    /// Seasonal period s; 1 degenerates to plain ARIMA.
    pub period: usize,
}

impl SarimaOrder {
    pub fn new(
        base: ArimaOrder,
        seasonal_p: usize,
        seasonal_d: usize,
        seasonal_q: usize,
        period: usize,
    ) -> Result<Self> {
        let order = SarimaOrder {
            base,
            seasonal_p,
            seasonal_d,
            seasonal_q,
            period,
        };
        order.validate()?;
        Ok(order)
    }

    /// The ARIMA order viewed as a degenerate seasonal order.
    pub fn from_arima(base: ArimaOrder) -> Self {
        SarimaOrder {
            base,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            period: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.period == 0 {
            return Err(Error::Domain("seasonal period must be at least 1".into()));
        }
        if self.period == 1 && (self.seasonal_p != 0 || self.seasonal_d != 0 || self.seasonal_q != 0)
        {
            return Err(Error::Domain(
                "seasonal orders must be zero when the period is 1".into(),
            ));
        }
        if self.seasonal_d > 1 {
            return Err(Error::Domain(format!(
                "seasonal differencing order {} exceeds 1",
                self.seasonal_d
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for SarimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}({},{},{})[{}]",
            self.base, self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
        )
    }
}

/// Holt-Winters smoothing parameters: additive damped trend, optional
/// additive seasonal component when `seasonal_period > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoltParams {
    /// Level smoothing, in (0,1).
    pub alpha: f64,
    /// Trend smoothing, in [0,1).
    pub beta: f64,
    /// Trend damping, in (0,1]; 1 is an undamped linear trend.
    pub phi: f64,
    /// 1 means no seasonal component.
    pub seasonal_period: usize,
    /// Seasonal smoothing, in [0,1); ignored when seasonal_period is 1.
    pub gamma: f64,
}

impl HoltParams {
    /// Non-seasonal damped-trend parameters.
    pub fn trend(alpha: f64, beta: f64, phi: f64) -> Result<Self> {
        let params = HoltParams {
            alpha,
            beta,
            phi,
            seasonal_period: 1,
            gamma: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha {} outside (0,1)", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::Domain(format!("beta {} outside [0,1)", self.beta)));
        }
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(Error::Domain(format!("phi {} outside (0,1]", self.phi)));
        }
        if self.seasonal_period == 0 {
            return Err(Error::Domain("seasonal period must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Domain(format!("gamma {} outside [0,1)", self.gamma)));
        }
        Ok(())
    }
}

/// Model family labels, as they appear in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelFamily {
    #[serde(rename = "ARIMA")]
    Arima,
    #[serde(rename = "SARIMA")]
    Sarima,
    #[serde(rename = "HOLT_WINTERS")]
    HoltWinters,
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ModelFamily::Arima => "ARIMA",
            ModelFamily::Sarima => "SARIMA",
            ModelFamily::HoltWinters => "HOLT_WINTERS",
        };
        f.write_str(name)
    }
}

/// Order or smoothing parameters, depending on the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelSpecConfig {
    #[serde(rename = "arima")]
    Arima { order: ArimaOrder },
    #[serde(rename = "sarima")]
    Sarima { order: SarimaOrder },
    #[serde(rename = "holt_winters")]
    HoltWinters { params: HoltParams },
}

impl ModelSpecConfig {
    /// Estimated free-parameter count (enters AIC).
    pub fn param_count(&self) -> usize {
        match self {
            ModelSpecConfig::Arima { order } => order.p + order.q + 1,
            ModelSpecConfig::Sarima { order } => {
                order.base.p + order.base.q + order.seasonal_p + order.seasonal_q + 1
            }
            ModelSpecConfig::HoltWinters { params } => {
                3 + usize::from(params.seasonal_period > 1)
            }
        }
    }

    /// Structural complexity for parsimony tie-breaks. Differencing passes
    /// count alongside coefficients: each one is an AR root pinned at the
    /// unit circle, not a free lunch.
    pub fn complexity(&self) -> usize {
        match self {
            ModelSpecConfig::Arima { order } => order.p + order.q + order.d,
            ModelSpecConfig::Sarima { order } => {
                order.base.p
                    + order.base.q
                    + order.base.d
                    + order.seasonal_p
                    + order.seasonal_q
                    + order.seasonal_d
            }
            ModelSpecConfig::HoltWinters { params } => {
                3 + usize::from(params.seasonal_period > 1)
            }
        }
    }
}

impl std::fmt::Display for ModelSpecConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelSpecConfig::Arima { order } => write!(f, "ARIMA{order}"),
            ModelSpecConfig::Sarima { order } => write!(f, "SARIMA{order}"),
            ModelSpecConfig::HoltWinters { params } => write!(
                f,
                "HW(alpha={:.2},beta={:.2},phi={:.2})",
                params.alpha, params.beta, params.phi
            ),
        }
    }
}

/// Estimated coefficients or final smoothing states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Coefficients {
    #[serde(rename = "arma")]
    Arma {
        ar: Vec<f64>,
        ma: Vec<f64>,
        seasonal_ar: Vec<f64>,
        seasonal_ma: Vec<f64>,
    },
    #[serde(rename = "smoothing")]
    Smoothing {
        level: f64,
        trend: f64,
        seasonal: Vec<f64>,
    },
}

/// One regular (period 1) or seasonal differencing pass, with the tail of
/// the pre-difference series needed to re-integrate forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct DiffStage {
    pub period: usize,
    pub tail: Vec<f64>,
}

/// Internal per-family forecasting state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub(crate) enum FitState {
    #[serde(rename = "arma")]
    Arma {
        /// Fully differenced training series (not mean-adjusted).
        w: Vec<f64>,
        /// Residuals aligned with `w`; zeros over the conditioning prefix.
        eps: Vec<f64>,
        /// Differencing passes in application order.
        stages: Vec<DiffStage>,
        /// Number of conditioning observations (p + P*s).
        n_conditioning: usize,
    },
    #[serde(rename = "holt")]
    Holt,
}

/// A trained model, immutable after construction and safely shareable.
///
/// Serializes to a JSON document carrying the family, order or smoothing
/// parameters, coefficients, innovation variance, training length and AIC,
/// plus the internal state needed to forecast after reloading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub family: ModelFamily,
    pub order_or_params: ModelSpecConfig,
    pub coefficients: Coefficients,
    pub mean_or_intercept: f64,
    /// Innovation variance (Mt^2).
    pub sigma2: f64,
    /// Training length in observations.
    pub n_obs: usize,
    pub loglik_approx: f64,
    pub aic: f64,
    /// In-sample one-step errors.
    pub residuals: Vec<f64>,
    /// Calendar year of the last training observation.
    pub last_obs_year: i32,
    pub(crate) state: FitState,
}

impl FittedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<FittedModel> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Point forecasts with central prediction-interval bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastPath {
    /// First forecast year (last training year + 1).
    pub start_year: i32,
    pub points: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Central confidence level, e.g. 0.95.
    pub level: f64,
}

impl ForecastPath {
    /// Checks bound ordering and length agreement.
    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.lower.len() || self.points.len() != self.upper.len() {
            return Err(Error::Domain("forecast bound lengths disagree".into()));
        }
        for h in 0..self.points.len() {
            if !(self.lower[h] <= self.points[h] && self.points[h] <= self.upper[h]) {
                return Err(Error::Domain(format!(
                    "bounds disordered at step {}: {} / {} / {}",
                    h + 1,
                    self.lower[h],
                    self.points[h],
                    self.upper[h]
                )));
            }
        }
        Ok(())
    }

    /// Interval half-widths per step.
    pub fn half_widths(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| (u - l) / 2.0)
            .collect()
    }
}

/// Training input must be non-empty, gap-free and finite. Emission-domain
/// constraints (non-negativity) are the loaders' concern, so simulated
/// zero-mean series are acceptable here.
pub(crate) fn check_trainable(series: &crate::ingest::AnnualSeries) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Domain(format!("series for {} is empty", series.country)));
    }
    if series.has_gaps() {
        return Err(Error::Domain(format!(
            "series for {} has unfilled gaps",
            series.country
        )));
    }
    if let Some(v) = series.values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "series for {} contains non-finite value {v}",
            series.country
        )));
    }
    Ok(())
}

/// One-step-ahead predictions for the positions of `full_values` beyond the
/// model's training length, filtering the fitted model through the observed
/// extension without re-estimating anything.
pub fn one_step_predictions(model: &FittedModel, full_values: &[f64]) -> Result<Vec<f64>> {
    match &model.state {
        FitState::Arma { .. } => arima::one_step_arma(model, full_values),
        FitState::Holt => holt::one_step_holt(model, full_values),
    }
}

/// Multi-step forecast with model-derived prediction intervals.
///
/// ARIMA/SARIMA points come from the ARMA recursion on the differenced
/// scale, re-integrated; interval half-widths grow with the psi-weight
/// cumulative sums. Holt-Winters points are the damped-trend extrapolation;
/// its intervals come from a 1000-path Gaussian simulation of the smoothing
/// recursions driven by `seed`.
pub fn forecast(model: &FittedModel, horizon: usize, level: f64, seed: u64) -> Result<ForecastPath> {
    if horizon < 1 {
        return Err(Error::Domain("forecast horizon must be at least 1".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} outside (0,1)")));
    }
    let path = match &model.state {
        FitState::Arma { .. } => arima::forecast_arma(model, horizon, level)?,
        FitState::Holt => holt::forecast_holt(model, horizon, level, seed)?,
    };
    path.validate()?;
    Ok(path)
}
