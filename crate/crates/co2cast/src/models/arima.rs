//! ARIMA and multiplicative seasonal ARIMA estimated by conditional sum of
//! squares.
//!
//! The differenced series w follows a mean-form ARMA: with z = w - mu,
//! phi(B) PHI(B^s) z = theta(B) THETA(B^s) eps. Residuals condition on the
//! first p + P*s observations with pre-sample errors set to zero. The mean
//! enters the one-step errors linearly, so it is profiled out of the search
//! and recovered in closed form for each candidate coefficient vector;
//! pure-mean orders therefore reduce exactly to the sample mean and
//! effective-n sample variance.

use crate::error::{Error, Result};
use crate::ingest::AnnualSeries;
use crate::models::optim;
use crate::models::{
    ArimaOrder, Coefficients, DiffStage, FitState, FittedModel, ForecastPath, ModelFamily,
    ModelSpecConfig, SarimaOrder,
};
use crate::stats::z_two_sided;

const SIGMA2_FLOOR: f64 = 1e-30;
/// Reflection coefficients are kept strictly inside the unit interval.
const PACF_CLAMP: f64 = 1.0 - 1e-10;

/// Maps partial autocorrelations in (-1,1) to stationary AR coefficients
/// via the Durbin-Levinson recursion.
pub(crate) fn pacf_to_ar(pacf: &[f64]) -> Vec<f64> {
    let k = pacf.len();
    let mut coeffs = vec![0.0; k];
    for j in 0..k {
        let r = pacf[j];
        let prev: Vec<f64> = coeffs[..j].to_vec();
        for i in 0..j {
            coeffs[i] = prev[i] - r * prev[j - 1 - i];
        }
        coeffs[j] = r;
    }
    coeffs
}

/// Inverse Durbin-Levinson. `None` when any reflection coefficient falls on
/// or outside the unit interval, i.e. the polynomial has a root on or inside
/// the unit circle.
pub(crate) fn ar_to_pacf(coeffs: &[f64]) -> Option<Vec<f64>> {
    let mut work = coeffs.to_vec();
    let k = work.len();
    let mut pacf = vec![0.0; k];
    for j in (0..k).rev() {
        let r = work[j];
        if !r.is_finite() || r.abs() >= 1.0 {
            return None;
        }
        pacf[j] = r;
        if j > 0 {
            let denom = 1.0 - r * r;
            let prev: Vec<f64> = work[..j].to_vec();
            for i in 0..j {
                work[i] = (prev[i] + r * prev[j - 1 - i]) / denom;
            }
        }
    }
    Some(pacf)
}

/// True when the AR polynomial 1 - sum(c_i B^i) has all roots outside the
/// unit circle.
pub(crate) fn is_stationary(coeffs: &[f64]) -> bool {
    coeffs.is_empty() || ar_to_pacf(coeffs).is_some()
}

/// True when the MA polynomial 1 + sum(c_j B^j) has all roots outside the
/// unit circle.
pub(crate) fn is_invertible(coeffs: &[f64]) -> bool {
    let negated: Vec<f64> = coeffs.iter().map(|c| -c).collect();
    is_stationary(&negated)
}

fn tanh_clamped(u: f64) -> f64 {
    u.tanh().clamp(-PACF_CLAMP, PACF_CLAMP)
}

/// Unconstrained block -> stationary AR coefficients.
fn unconstrained_to_ar(block: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = block.iter().map(|&u| tanh_clamped(u)).collect();
    pacf_to_ar(&pacf)
}

/// Unconstrained block -> invertible MA coefficients.
fn unconstrained_to_ma(block: &[f64]) -> Vec<f64> {
    unconstrained_to_ar(block).iter().map(|c| -c).collect()
}

/// Expands coefficients in "1 - sum c_i B^i" form into plain polynomial
/// coefficients [1, -c_1, ..., -c_k] at stride `period`.
fn ar_polynomial(coeffs: &[f64], period: usize) -> Vec<f64> {
    let mut poly = vec![0.0; coeffs.len() * period + 1];
    poly[0] = 1.0;
    for (i, &c) in coeffs.iter().enumerate() {
        poly[(i + 1) * period] = -c;
    }
    poly
}

/// Expands coefficients in "1 + sum c_j B^j" form at stride `period`.
fn ma_polynomial(coeffs: &[f64], period: usize) -> Vec<f64> {
    let mut poly = vec![0.0; coeffs.len() * period + 1];
    poly[0] = 1.0;
    for (j, &c) in coeffs.iter().enumerate() {
        poly[(j + 1) * period] = c;
    }
    poly
}

fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Lag weights of the combined AR side in recursion form: z_t depends on
/// sum_i weights[i-1] * z_{t-i}. Input polynomial is [1, a_1, ...]; the
/// recursion weight at lag i is -a_i.
fn recursion_weights(poly: &[f64]) -> Vec<f64> {
    poly[1..].iter().map(|a| -a).collect()
}

struct CssProblem<'a> {
    w: &'a [f64],
    p: usize,
    q: usize,
    sp: usize,
    sq: usize,
    period: usize,
}

struct CssSolution {
    mu: f64,
    residuals: Vec<f64>,
    css: f64,
    ar: Vec<f64>,
    ma: Vec<f64>,
    seasonal_ar: Vec<f64>,
    seasonal_ma: Vec<f64>,
}

impl<'a> CssProblem<'a> {
    fn dim(&self) -> usize {
        self.p + self.q + self.sp + self.sq
    }

    /// Conditioning prefix length: the combined AR degree.
    fn n_conditioning(&self) -> usize {
        self.p + self.sp * self.period
    }

    fn unpack(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let (a, rest) = u.split_at(self.p);
        let (b, rest) = rest.split_at(self.q);
        let (c, d) = rest.split_at(self.sp);
        (
            unconstrained_to_ar(a),
            unconstrained_to_ma(b),
            unconstrained_to_ar(c),
            unconstrained_to_ma(d),
        )
    }

    fn solve(&self, u: &[f64]) -> CssSolution {
        let (ar, ma, seasonal_ar, seasonal_ma) = self.unpack(u);
        let ar_comb = recursion_weights(&multiply(
            &ar_polynomial(&ar, 1),
            &ar_polynomial(&seasonal_ar, self.period),
        ));
        let ma_comb = &multiply(
            &ma_polynomial(&ma, 1),
            &ma_polynomial(&seasonal_ma, self.period),
        )[1..];

        let n = self.w.len();
        let m = self.n_conditioning();
        // e0: residuals at mu = 0; h: residual response to a unit mean shift
        let mut e0 = vec![0.0; n];
        let mut h = vec![0.0; n];
        let ar_sum: f64 = ar_comb.iter().sum();
        for t in m..n {
            let mut e = self.w[t];
            let mut g = 1.0 - ar_sum;
            for (i, &a) in ar_comb.iter().enumerate() {
                e -= a * self.w[t - 1 - i];
            }
            for (j, &b) in ma_comb.iter().enumerate() {
                if t >= j + 1 {
                    e -= b * e0[t - 1 - j];
                    g -= b * h[t - 1 - j];
                }
            }
            e0[t] = e;
            h[t] = g;
        }

        let num: f64 = e0[m..].iter().zip(&h[m..]).map(|(a, b)| a * b).sum();
        let den: f64 = h[m..].iter().map(|v| v * v).sum();
        let mu = if den > 0.0 { num / den } else { 0.0 };

        let mut css = 0.0;
        let mut residuals = vec![0.0; n];
        for t in m..n {
            let e = e0[t] - mu * h[t];
            residuals[t] = e;
            css += e * e;
        }
        CssSolution {
            mu,
            residuals,
            css,
            ar,
            ma,
            seasonal_ar,
            seasonal_ma,
        }
    }
}

/// Applies regular differencing `d` times then seasonal differencing `sd`
/// times at `period`, recording the tails needed to integrate forecasts.
fn difference_with_stages(
    values: &[f64],
    d: usize,
    sd: usize,
    period: usize,
) -> (Vec<f64>, Vec<DiffStage>) {
    let mut w = values.to_vec();
    let mut stages = Vec::with_capacity(d + sd);
    for _ in 0..d {
        stages.push(DiffStage {
            period: 1,
            tail: vec![*w.last().expect("non-empty")],
        });
        w = w.windows(2).map(|x| x[1] - x[0]).collect();
    }
    for _ in 0..sd {
        stages.push(DiffStage {
            period,
            tail: w[w.len() - period..].to_vec(),
        });
        w = (period..w.len()).map(|t| w[t] - w[t - period]).collect();
    }
    (w, stages)
}

/// Re-integrates forecasts of the differenced series by undoing each stage
/// in reverse application order.
fn integrate(mut forecasts: Vec<f64>, stages: &[DiffStage]) -> Vec<f64> {
    for stage in stages.iter().rev() {
        let k = stage.period;
        let mut restored = Vec::with_capacity(forecasts.len());
        for (h, &f) in forecasts.iter().enumerate() {
            let prev = if h < k {
                stage.tail[stage.tail.len() - k + h]
            } else {
                restored[h - k]
            };
            restored.push(f + prev);
        }
        forecasts = restored;
    }
    forecasts
}

/// Psi weights of the full model (differencing factors folded into the AR
/// side), driving forecast-error variance growth.
fn psi_weights(
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
    d: usize,
    sd: usize,
    period: usize,
    count: usize,
) -> Vec<f64> {
    let mut full_ar = multiply(
        &ar_polynomial(ar, 1),
        &ar_polynomial(seasonal_ar, period),
    );
    for _ in 0..d {
        full_ar = multiply(&full_ar, &[1.0, -1.0]);
    }
    for _ in 0..sd {
        let mut seasonal_diff = vec![0.0; period + 1];
        seasonal_diff[0] = 1.0;
        seasonal_diff[period] = -1.0;
        full_ar = multiply(&full_ar, &seasonal_diff);
    }
    let ma_comb = multiply(&ma_polynomial(ma, 1), &ma_polynomial(seasonal_ma, period));

    let mut psi = Vec::with_capacity(count);
    psi.push(1.0);
    for m in 1..count {
        let mut value = if m < ma_comb.len() { ma_comb[m] } else { 0.0 };
        for i in 1..=m.min(full_ar.len() - 1) {
            value -= full_ar[i] * psi[m - i];
        }
        psi.push(value);
    }
    psi
}

/// Fits ARIMA(p,d,q) with intercept by conditional sum of squares.
pub fn fit_arima(series: &AnnualSeries, order: ArimaOrder) -> Result<FittedModel> {
    order.validate()?;
    let required = order.p + order.q + order.d + 10;
    fit_inner(
        series,
        SarimaOrder::from_arima(order),
        ModelFamily::Arima,
        ModelSpecConfig::Arima { order },
        required,
    )
}

/// Fits a multiplicative SARIMA by conditional sum of squares. With period 1
/// the result is numerically identical to [`fit_arima`] on the base order.
pub fn fit_sarima(series: &AnnualSeries, order: SarimaOrder) -> Result<FittedModel> {
    order.validate()?;
    let s = order.period;
    let required = order.base.p
        + order.base.q
        + order.seasonal_p * s
        + order.seasonal_q * s
        + order.base.d
        + order.seasonal_d * s
        + 10;
    fit_inner(
        series,
        order,
        ModelFamily::Sarima,
        ModelSpecConfig::Sarima { order },
        required,
    )
}

fn fit_inner(
    series: &AnnualSeries,
    order: SarimaOrder,
    family: ModelFamily,
    spec: ModelSpecConfig,
    required: usize,
) -> Result<FittedModel> {
    super::check_trainable(series)?;
    let n_obs = series.len();
    if n_obs < required {
        return Err(Error::InsufficientData {
            required,
            actual: n_obs,
        });
    }

    let (w, stages) = difference_with_stages(
        &series.values,
        order.base.d,
        order.seasonal_d,
        order.period,
    );
    let problem = CssProblem {
        w: &w,
        p: order.base.p,
        q: order.base.q,
        sp: order.seasonal_p,
        sq: order.seasonal_q,
        period: order.period,
    };

    let dim = problem.dim();
    let (outcome, any_converged) = optim::multi_start(|u| problem.solve(u).css, dim);
    if !any_converged {
        return Err(Error::NonConvergence {
            objective: outcome.fx,
            point: outcome.x,
        });
    }
    let solution = problem.solve(&outcome.x);

    if !is_stationary(&solution.ar) || !is_stationary(&solution.seasonal_ar) {
        return Err(Error::Constraint(
            "AR polynomial has a root on or inside the unit circle".into(),
        ));
    }
    if !is_invertible(&solution.ma) || !is_invertible(&solution.seasonal_ma) {
        return Err(Error::Constraint(
            "MA polynomial has a root on or inside the unit circle".into(),
        ));
    }

    let m = problem.n_conditioning();
    let n_eff = w.len() - m;
    if n_eff == 0 {
        return Err(Error::InsufficientData {
            required: m + 1,
            actual: w.len(),
        });
    }
    let sigma2 = (solution.css / n_eff as f64).max(SIGMA2_FLOOR);
    let k = spec.param_count();
    let n_eff_f = n_eff as f64;
    let aic = n_eff_f * sigma2.ln() + 2.0 * k as f64;
    let loglik_approx = -0.5 * n_eff_f * ((2.0 * std::f64::consts::PI).ln() + sigma2.ln() + 1.0);

    Ok(FittedModel {
        family,
        order_or_params: spec,
        coefficients: Coefficients::Arma {
            ar: solution.ar,
            ma: solution.ma,
            seasonal_ar: solution.seasonal_ar,
            seasonal_ma: solution.seasonal_ma,
        },
        mean_or_intercept: solution.mu,
        sigma2,
        n_obs,
        loglik_approx,
        aic,
        residuals: solution.residuals[m..].to_vec(),
        last_obs_year: series.last_year(),
        state: FitState::Arma {
            eps: solution.residuals,
            w,
            stages,
            n_conditioning: m,
        },
    })
}

/// One-step-ahead predictions over an extension of the training series.
///
/// Re-runs the residual recursion with the fitted coefficients across the
/// full (train + extension) values; the prediction of y_t given everything
/// before it is y_t minus its innovation. Returns predictions for the
/// extension positions only.
pub(crate) fn one_step_arma(model: &FittedModel, full_values: &[f64]) -> Result<Vec<f64>> {
    let (ar, ma, seasonal_ar, seasonal_ma) = match &model.coefficients {
        Coefficients::Arma {
            ar,
            ma,
            seasonal_ar,
            seasonal_ma,
        } => (ar, ma, seasonal_ar, seasonal_ma),
        Coefficients::Smoothing { .. } => {
            return Err(Error::Domain("ARMA filter on smoothing coefficients".into()))
        }
    };
    let (d, sd, period) = match &model.order_or_params {
        ModelSpecConfig::Arima { order } => (order.d, 0, 1),
        ModelSpecConfig::Sarima { order } => (order.base.d, order.seasonal_d, order.period),
        ModelSpecConfig::HoltWinters { .. } => {
            return Err(Error::Domain("ARMA filter on smoothing parameters".into()))
        }
    };
    let n_train = model.n_obs;
    if full_values.len() <= n_train {
        return Err(Error::Domain(
            "filter input must extend the training series".into(),
        ));
    }

    let (w, _) = difference_with_stages(full_values, d, sd, period);
    let mu = model.mean_or_intercept;
    let ar_comb = recursion_weights(&multiply(
        &ar_polynomial(ar, 1),
        &ar_polynomial(seasonal_ar, period),
    ));
    let ma_comb = multiply(&ma_polynomial(ma, 1), &ma_polynomial(seasonal_ma, period));

    let m = ar_comb.len();
    let n = w.len();
    let mut eps = vec![0.0; n];
    for t in m..n {
        let mut e = w[t] - mu;
        for (i, &a) in ar_comb.iter().enumerate() {
            e -= a * (w[t - 1 - i] - mu);
        }
        for (j, &b) in ma_comb[1..].iter().enumerate() {
            if t >= j + 1 {
                e -= b * eps[t - 1 - j];
            }
        }
        eps[t] = e;
    }

    // w index t corresponds to original index t + d + sd*period
    let shift = d + sd * period;
    Ok((n_train..full_values.len())
        .map(|idx| full_values[idx] - eps[idx - shift])
        .collect())
}

/// ARIMA/SARIMA multi-step forecast: ARMA recursion on the differenced
/// scale, cumulative re-integration, psi-weight interval half-widths.
pub(crate) fn forecast_arma(
    model: &FittedModel,
    horizon: usize,
    level: f64,
) -> Result<ForecastPath> {
    let (w, eps, stages) = match &model.state {
        FitState::Arma { w, eps, stages, .. } => (w, eps, stages),
        FitState::Holt => unreachable!("dispatched on state"),
    };
    let (ar, ma, seasonal_ar, seasonal_ma) = match &model.coefficients {
        Coefficients::Arma {
            ar,
            ma,
            seasonal_ar,
            seasonal_ma,
        } => (ar, ma, seasonal_ar, seasonal_ma),
        Coefficients::Smoothing { .. } => {
            return Err(Error::Domain("ARMA forecast on smoothing coefficients".into()))
        }
    };
    let (d, sd, period) = match &model.order_or_params {
        ModelSpecConfig::Arima { order } => (order.d, 0, 1),
        ModelSpecConfig::Sarima { order } => (order.base.d, order.seasonal_d, order.period),
        ModelSpecConfig::HoltWinters { .. } => {
            return Err(Error::Domain("ARMA forecast on smoothing parameters".into()))
        }
    };

    let mu = model.mean_or_intercept;
    let ar_comb = recursion_weights(&multiply(
        &ar_polynomial(ar, 1),
        &ar_polynomial(seasonal_ar, period),
    ));
    let ma_comb = multiply(&ma_polynomial(ma, 1), &ma_polynomial(seasonal_ma, period));

    let n = w.len();
    // extended mean-adjusted series: history then forecasts
    let mut z: Vec<f64> = w.iter().map(|v| v - mu).collect();
    for t in n..n + horizon {
        let mut value = 0.0;
        for (i, &a) in ar_comb.iter().enumerate() {
            if t >= i + 1 {
                value += a * z[t - 1 - i];
            }
        }
        for (j, &b) in ma_comb[1..].iter().enumerate() {
            if t >= j + 1 && t - 1 - j < n {
                value += b * eps[t - 1 - j];
            }
        }
        z.push(value);
    }
    let w_forecasts: Vec<f64> = z[n..].iter().map(|v| v + mu).collect();
    let points = integrate(w_forecasts, stages);

    let psi = psi_weights(ar, ma, seasonal_ar, seasonal_ma, d, sd, period, horizon);
    let zq = z_two_sided(level);
    let mut cumulative = 0.0;
    let mut lower = Vec::with_capacity(horizon);
    let mut upper = Vec::with_capacity(horizon);
    for (h, &point) in points.iter().enumerate() {
        cumulative += psi[h] * psi[h];
        let half = zq * (model.sigma2 * cumulative).sqrt();
        lower.push(point - half);
        upper.push(point + half);
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
    use crate::models::{forecast, simulate_arma};
    use crate::stats::mean;
    use proptest::prelude::*;

    fn series_from(values: Vec<f64>) -> AnnualSeries {
        let start = 2023 - values.len() as i32 + 1;
        AnnualSeries::new("TST", start, values)
    }

    #[test]
    fn pacf_transform_round_trips() {
        let pacf = vec![0.6, -0.3, 0.2];
        let coeffs = pacf_to_ar(&pacf);
        let back = ar_to_pacf(&coeffs).expect("stationary");
        for (a, b) in pacf.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn explosive_ar_is_detected() {
        assert!(!is_stationary(&[1.2]));
        assert!(is_stationary(&[0.9]));
        assert!(is_stationary(&[1.2, -0.3]));
        assert!(!is_stationary(&[1.2, 0.3]));
    }

    #[test]
    fn mean_only_model_is_sample_mean_and_variance() {
        let values = vec![3.0, 7.0, 1.0, 9.0, 4.0, 6.0, 2.0, 8.0, 5.0, 5.0, 4.5, 6.5];
        let series = series_from(values.clone());
        let model = fit_arima(&series, ArimaOrder::new(0, 0, 0).unwrap()).unwrap();
        let m = mean(&values);
        assert!((model.mean_or_intercept - m).abs() < 1e-12);
        let biased_var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
        assert!((model.sigma2 - biased_var).abs() < 1e-12);
    }

    #[test]
    fn white_noise_forecast_is_flat_mean_with_fixed_band() {
        let values = vec![3.0, 7.0, 1.0, 9.0, 4.0, 6.0, 2.0, 8.0, 5.0, 5.0, 4.5, 6.5];
        let series = series_from(values.clone());
        let model = fit_arima(&series, ArimaOrder::new(0, 0, 0).unwrap()).unwrap();
        let path = forecast(&model, 4, 0.95, 0).unwrap();
        let mu = mean(&values);
        let half = 1.959964 * model.sigma2.sqrt();
        for h in 0..4 {
            assert!((path.points[h] - mu).abs() < 1e-12);
            assert!((path.upper[h] - (mu + half)).abs() < 1e-12);
            assert!((path.lower[h] - (mu - half)).abs() < 1e-12);
        }
    }

    #[test]
    fn ar1_recovery_within_tolerance() {
        let order = ArimaOrder::new(1, 0, 0).unwrap();
        let data = simulate_arma(order, &[0.7], &[], 1.0, 500, 42).unwrap();
        let model = fit_arima(&series_from(data), order).unwrap();
        match &model.coefficients {
            Coefficients::Arma { ar, .. } => {
                assert!((ar[0] - 0.7).abs() < 0.1, "ar = {}", ar[0]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn ma1_recovery_within_tolerance() {
        let order = ArimaOrder::new(0, 0, 1).unwrap();
        let data = simulate_arma(order, &[], &[0.5], 1.0, 500, 7).unwrap();
        let model = fit_arima(&series_from(data), order).unwrap();
        match &model.coefficients {
            Coefficients::Arma { ma, .. } => {
                assert!((ma[0] - 0.5).abs() < 0.1, "ma = {}", ma[0]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn seasonal_ar_recovery() {
        // seasonal AR(1) at s=4 is an AR(4) with one nonzero lag
        let order = ArimaOrder::new(4, 0, 0).unwrap();
        let data = simulate_arma(order, &[0.0, 0.0, 0.0, 0.6], &[], 1.0, 400, 11).unwrap();
        let seasonal = SarimaOrder::new(ArimaOrder::new(0, 0, 0).unwrap(), 1, 0, 0, 4).unwrap();
        let model = fit_sarima(&series_from(data), seasonal).unwrap();
        match &model.coefficients {
            Coefficients::Arma { seasonal_ar, .. } => {
                assert!((seasonal_ar[0] - 0.6).abs() < 0.1, "sar = {}", seasonal_ar[0]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn sarima_with_unit_period_matches_arima_bitwise() {
        let order = ArimaOrder::new(1, 1, 1).unwrap();
        let data = simulate_arma(ArimaOrder::new(1, 0, 0).unwrap(), &[0.5], &[], 1.0, 60, 3).unwrap();
        let series = series_from(data);
        let a = fit_arima(&series, order).unwrap();
        let s = fit_sarima(&series, SarimaOrder::from_arima(order)).unwrap();
        assert_eq!(a.coefficients, s.coefficients);
        assert_eq!(a.mean_or_intercept, s.mean_or_intercept);
        assert_eq!(a.sigma2, s.sigma2);
        assert_eq!(a.residuals, s.residuals);
        let fa = forecast(&a, 10, 0.95, 0).unwrap();
        let fs = forecast(&s, 10, 0.95, 0).unwrap();
        assert_eq!(fa.points, fs.points);
        assert_eq!(fa.lower, fs.lower);
        assert_eq!(fa.upper, fs.upper);
    }

    #[test]
    fn zero_period_is_domain_error() {
        assert!(matches!(
            SarimaOrder::new(ArimaOrder::new(1, 0, 0).unwrap(), 0, 0, 0, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn short_series_is_insufficient() {
        let series = series_from(vec![1.0; 12]);
        assert!(matches!(
            fit_arima(&series, ArimaOrder::new(2, 1, 2).unwrap()),
            Err(Error::InsufficientData { required: 15, actual: 12 })
        ));
    }

    #[test]
    fn ar1_closed_form_forecast() {
        // AR(1), mean 0, coefficient 0.5, last observation 4:
        // points 2, 1, 0.5; half-widths 1.96, 1.96*sqrt(1.25), 1.96*sqrt(1.3125)
        let order = ArimaOrder::new(1, 0, 0).unwrap();
        let model = FittedModel {
            family: ModelFamily::Arima,
            order_or_params: ModelSpecConfig::Arima { order },
            coefficients: Coefficients::Arma {
                ar: vec![0.5],
                ma: vec![],
                seasonal_ar: vec![],
                seasonal_ma: vec![],
            },
            mean_or_intercept: 0.0,
            sigma2: 1.0,
            n_obs: 2,
            loglik_approx: 0.0,
            aic: 0.0,
            residuals: vec![0.0],
            last_obs_year: 2023,
            state: FitState::Arma {
                w: vec![0.0, 4.0],
                eps: vec![0.0, 0.0],
                stages: vec![],
                n_conditioning: 1,
            },
        };
        let path = forecast(&model, 3, 0.95, 0).unwrap();
        assert!((path.points[0] - 2.0).abs() < 1e-12);
        assert!((path.points[1] - 1.0).abs() < 1e-12);
        assert!((path.points[2] - 0.5).abs() < 1e-12);
        let half = path.half_widths();
        assert!((half[0] - 1.959964).abs() < 1e-9);
        assert!((half[1] - 1.959964 * 1.25f64.sqrt()).abs() < 1e-9);
        assert!((half[2] - 1.959964 * 1.3125f64.sqrt()).abs() < 1e-9);
        assert!((half[1] - 2.191).abs() < 1e-3);
        assert!((half[2] - 2.245).abs() < 1e-3);
    }

    #[test]
    fn integrated_fit_matches_hand_differenced_fit() {
        let order1 = ArimaOrder::new(1, 1, 0).unwrap();
        let base = simulate_arma(ArimaOrder::new(1, 0, 0).unwrap(), &[0.4], &[], 1.0, 80, 9).unwrap();
        // integrate once to get a d=1 series
        let mut level = 100.0;
        let values: Vec<f64> = base
            .iter()
            .map(|v| {
                level += v;
                level
            })
            .collect();
        let series = series_from(values.clone());
        let model_d1 = fit_arima(&series, order1).unwrap();
        let path_d1 = forecast(&model_d1, 5, 0.95, 0).unwrap();

        let diffed: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let diff_series = AnnualSeries::new("TST", series.start_year + 1, diffed);
        let model_d0 = fit_arima(&diff_series, ArimaOrder::new(1, 0, 0).unwrap()).unwrap();
        let path_d0 = forecast(&model_d0, 5, 0.95, 0).unwrap();

        let mut last = *values.last().unwrap();
        for h in 0..5 {
            last += path_d0.points[h];
            assert!(
                (path_d1.points[h] - last).abs() < 1e-8,
                "h={h}: {} vs {}",
                path_d1.points[h],
                last
            );
        }
    }

    #[test]
    fn residual_mean_is_absorbed_by_intercept() {
        let order = ArimaOrder::new(1, 0, 0).unwrap();
        let data: Vec<f64> = simulate_arma(order, &[0.6], &[], 1.0, 300, 21)
            .unwrap()
            .iter()
            .map(|v| v + 50.0)
            .collect();
        let model = fit_arima(&series_from(data), order).unwrap();
        let resid_mean = mean(&model.residuals);
        assert!(
            resid_mean.abs() <= 0.05 * model.sigma2.sqrt(),
            "residual mean {resid_mean} vs sigma {}",
            model.sigma2.sqrt()
        );
    }

    #[test]
    fn one_step_filter_matches_ar1_recursion() {
        let order = ArimaOrder::new(1, 0, 0).unwrap();
        let data = simulate_arma(order, &[0.6], &[], 1.0, 80, 31).unwrap();
        let train = series_from(data[..60].to_vec());
        let model = fit_arima(&train, order).unwrap();
        let (phi, mu) = match &model.coefficients {
            Coefficients::Arma { ar, .. } => (ar[0], model.mean_or_intercept),
            _ => unreachable!(),
        };
        let predictions = crate::models::one_step_predictions(&model, &data).unwrap();
        assert_eq!(predictions.len(), 20);
        for (i, pred) in predictions.iter().enumerate() {
            let expected = mu + phi * (data[60 + i - 1] - mu);
            assert!((pred - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn model_json_round_trip_preserves_forecasts() {
        let order = ArimaOrder::new(1, 1, 1).unwrap();
        let data = simulate_arma(ArimaOrder::new(1, 0, 0).unwrap(), &[0.5], &[], 2.0, 60, 17)
            .unwrap()
            .iter()
            .map(|v| v + 200.0)
            .collect();
        let model = fit_arima(&series_from(data), order).unwrap();
        let text = model.to_json().unwrap();
        assert!(text.contains("\"sigma2\""));
        assert!(text.contains("\"aic\""));
        let reloaded = FittedModel::from_json(&text).unwrap();
        let a = forecast(&model, 7, 0.95, 0).unwrap();
        let b = forecast(&reloaded, 7, 0.95, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn variance_grows_linearly_for_random_walk() {
        let values: Vec<f64> = (0..40).map(|t| 100.0 + t as f64 + ((t * 7) % 5) as f64).collect();
        let series = series_from(values);
        let model = fit_arima(&series, ArimaOrder::new(0, 1, 0).unwrap()).unwrap();
        let path = forecast(&model, 6, 0.95, 0).unwrap();
        let half = path.half_widths();
        for h in 0..6 {
            let expected = 1.959964 * (model.sigma2 * (h as f64 + 1.0)).sqrt();
            assert!((half[h] - expected).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn psi_half_widths_never_shrink(
            pacf_ar in proptest::collection::vec(-0.9f64..0.9, 0..3),
            pacf_ma in proptest::collection::vec(-0.9f64..0.9, 0..3),
        ) {
            let ar = pacf_to_ar(&pacf_ar);
            let ma: Vec<f64> = pacf_to_ar(&pacf_ma).iter().map(|c| -c).collect();
            let psi = psi_weights(&ar, &ma, &[], &[], 0, 0, 1, 37);
            let mut cumulative = 0.0;
            let mut prev = 0.0;
            for value in psi {
                cumulative += value * value;
                prop_assert!(cumulative >= prev - 1e-15);
                prev = cumulative;
            }
        }
    }
}
