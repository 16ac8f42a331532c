//! Series preparation: gap interpolation, outlier diagnostics, differencing
//! and stationarity tests.
//!
//! Outlier handling is flag-only. Values are never altered or removed here;
//! anomalies that reflect genuine disruptions stay in the series and removal
//! is an explicit caller action.

mod stationarity;

pub use stationarity::{
    adf_default_lag, adf_test, kpss_test, AdfRegression, CriticalValues, Decision,
    KpssRegression, StationarityResult, TestName,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AnnualSeries;
use crate::stats::{mean, quantile_type7, sample_variance};

/// Conventional Z-score cut.
pub const ZSCORE_THRESHOLD: f64 = 3.0;
/// Conventional IQR fence multiplier.
pub const IQR_MULTIPLIER: f64 = 1.5;

/// Outlier diagnostic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierMethod {
    ZScore,
    Iqr,
}

/// Positions flagged by one diagnostic, with per-position scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub method: OutlierMethod,
    /// Flagged observation indices, ascending.
    pub indices: Vec<usize>,
    /// Diagnostic value per flagged index: the |z| score, or the distance
    /// beyond the violated IQR fence.
    pub scores: Vec<f64>,
    /// The cut used: z threshold or fence multiplier.
    pub threshold: f64,
}

/// Fills interior gaps by linear interpolation between the nearest known
/// neighbors. Filled positions carry the `interpolated` flag; nothing else
/// changes, so the operation is idempotent.
pub fn interpolate_missing(series: &AnnualSeries) -> Result<AnnualSeries> {
    let mut out = series.clone();
    let n = out.values.len();
    let mut i = 0;
    while i < n {
        if !out.flags[i].missing {
            i += 1;
            continue;
        }
        // run of missing values [i, j)
        let mut j = i;
        while j < n && out.flags[j].missing {
            j += 1;
        }
        if i == 0 || j == n {
            return Err(Error::UnfillableGap {
                country: out.country.clone(),
                year: out.year_at(if i == 0 { 0 } else { n - 1 }),
            });
        }
        let left = out.values[i - 1];
        let right = out.values[j];
        let span = (j - (i - 1)) as f64;
        for k in i..j {
            let step = (k - (i - 1)) as f64;
            out.values[k] = left + (right - left) * step / span;
            out.flags[k].missing = false;
            out.flags[k].interpolated = true;
        }
        i = j;
    }
    Ok(out)
}

/// Flags anomalous observations without touching the values.
///
/// Z-score: positions where |value - mean| / sample std exceeds 3.0. A
/// zero-variance series yields an empty report, no division performed.
/// IQR: positions outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR] with quartiles from
/// the linear-interpolation quantile rule.
pub fn detect_outliers(series: &AnnualSeries, method: OutlierMethod) -> Result<OutlierReport> {
    if series.len() < 4 {
        return Err(Error::InsufficientData {
            required: 4,
            actual: series.len(),
        });
    }
    if series.has_gaps() {
        return Err(Error::Domain(format!(
            "series for {} still has gaps; interpolate before outlier detection",
            series.country
        )));
    }
    let values = &series.values;
    let mut indices = Vec::new();
    let mut scores = Vec::new();
    let threshold;
    match method {
        OutlierMethod::ZScore => {
            threshold = ZSCORE_THRESHOLD;
            let m = mean(values);
            let sd = sample_variance(values).sqrt();
            if sd > 0.0 {
                for (i, &v) in values.iter().enumerate() {
                    let z = (v - m).abs() / sd;
                    if z > threshold {
                        indices.push(i);
                        scores.push(z);
                    }
                }
            }
        }
        OutlierMethod::Iqr => {
            threshold = IQR_MULTIPLIER;
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let q1 = quantile_type7(&sorted, 0.25);
            let q3 = quantile_type7(&sorted, 0.75);
            let iqr = q3 - q1;
            let lower = q1 - threshold * iqr;
            let upper = q3 + threshold * iqr;
            for (i, &v) in values.iter().enumerate() {
                if v < lower {
                    indices.push(i);
                    scores.push(lower - v);
                } else if v > upper {
                    indices.push(i);
                    scores.push(v - upper);
                }
            }
        }
    }
    Ok(OutlierReport {
        method,
        indices,
        scores,
        threshold,
    })
}

/// Copies a report's flags onto the series annotations.
pub fn annotate_outliers(series: &mut AnnualSeries, report: &OutlierReport) {
    for &i in &report.indices {
        match report.method {
            OutlierMethod::ZScore => series.flags[i].outlier_zscore = true,
            OutlierMethod::Iqr => series.flags[i].outlier_iqr = true,
        }
    }
}

/// Applies first-differencing `d` times; output length is `len - d`.
pub fn difference(values: &[f64], d: usize) -> Result<Vec<f64>> {
    if d >= values.len() {
        return Err(Error::Domain(format!(
            "differencing order {d} not below series length {}",
            values.len()
        )));
    }
    let mut out = values.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}
