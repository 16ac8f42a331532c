//! Augmented Dickey-Fuller and KPSS stationarity tests.
//!
//! ADF tests the unit-root null; KPSS tests the stationarity null. The two
//! are complementary: a trending series should fail KPSS level-stationarity
//! while ADF with a trend term still rejects the unit root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TestName {
    Adf,
    Kpss,
}

/// Deterministic regression for the ADF test equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdfRegression {
    Constant,
    ConstantAndTrend,
}

/// Null hypothesis family for the KPSS test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpssRegression {
    Level,
    Trend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    RejectNull,
    FailToReject,
}

/// Thresholds at the three tabulated significance levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    #[serde(rename = "0.01")]
    pub pct_1: f64,
    #[serde(rename = "0.05")]
    pub pct_5: f64,
    #[serde(rename = "0.10")]
    pub pct_10: f64,
}

/// Outcome of one stationarity test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityResult {
    pub test_name: TestName,
    pub statistic: f64,
    pub critical_values: CriticalValues,
    /// P-value bracketed between tabulated critical values.
    pub p_value_band: (f64, f64),
    pub decision_at_5pct: Decision,
}

/// Default ADF lag order: floor((n-1)^(1/3)).
pub fn adf_default_lag(n: usize) -> usize {
    ((n as f64 - 1.0).powf(1.0 / 3.0)).floor() as usize
}

// MacKinnon (2010) response-surface coefficients for the Dickey-Fuller
// t-distribution, one unit root. cv = b0 + b1/T + b2/T^2 + b3/T^3.
const TAU_C: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const TAU_CT: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

fn response_surface(table: &[[f64; 4]; 3], t: f64) -> CriticalValues {
    let eval = |b: &[f64; 4]| b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t);
    CriticalValues {
        pct_1: eval(&table[0]),
        pct_5: eval(&table[1]),
        pct_10: eval(&table[2]),
    }
}

// KPSS (1992) Table 1 critical values.
const KPSS_LEVEL: CriticalValues = CriticalValues {
    pct_1: 0.739,
    pct_5: 0.463,
    pct_10: 0.347,
};
const KPSS_TREND: CriticalValues = CriticalValues {
    pct_1: 0.216,
    pct_5: 0.146,
    pct_10: 0.119,
};

/// Augmented Dickey-Fuller unit-root test.
///
/// Estimates dy_t = c (+ b t) + rho y_{t-1} + sum_i c_i dy_{t-i} + e_t by
/// OLS; the statistic is the t-ratio on rho. `lag` defaults to
/// [`adf_default_lag`]. The null is a unit root, rejected when the statistic
/// falls below the 5% critical value.
pub fn adf_test(
    values: &[f64],
    lag: Option<usize>,
    regression: AdfRegression,
) -> Result<StationarityResult> {
    let n = values.len();
    let lag = lag.unwrap_or_else(|| adf_default_lag(n));
    let required = 12 + lag;
    if n < required {
        return Err(Error::InsufficientData {
            required,
            actual: n,
        });
    }

    let dy: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    // regression sample: value indices t = lag+1 .. n-1
    let nobs = n - 1 - lag;
    let trend = regression == AdfRegression::ConstantAndTrend;
    let ncols = 2 + lag + usize::from(trend);
    let mut x = Vec::with_capacity(nobs);
    let mut y = Vec::with_capacity(nobs);
    for t in (lag + 1)..n {
        let mut row = Vec::with_capacity(ncols);
        row.push(1.0);
        if trend {
            row.push(t as f64);
        }
        row.push(values[t - 1]);
        for i in 1..=lag {
            row.push(dy[t - 1 - i]);
        }
        x.push(row);
        y.push(dy[t - 1]);
    }

    let fit = ols(&x, &y)?;
    let rho_idx = 1 + usize::from(trend);
    let statistic = fit.coefficients[rho_idx] / fit.std_errors[rho_idx];

    let table = match regression {
        AdfRegression::Constant => &TAU_C,
        AdfRegression::ConstantAndTrend => &TAU_CT,
    };
    let critical_values = response_surface(table, nobs as f64);
    let p_value_band = if statistic <= critical_values.pct_1 {
        (0.0, 0.01)
    } else if statistic <= critical_values.pct_5 {
        (0.01, 0.05)
    } else if statistic <= critical_values.pct_10 {
        (0.05, 0.10)
    } else {
        (0.10, 1.0)
    };
    let decision_at_5pct = if statistic < critical_values.pct_5 {
        Decision::RejectNull
    } else {
        Decision::FailToReject
    };
    Ok(StationarityResult {
        test_name: TestName::Adf,
        statistic,
        critical_values,
        p_value_band,
        decision_at_5pct,
    })
}

/// KPSS stationarity test with Newey-West long-run variance.
///
/// The automatic bandwidth is floor(4 (n/100)^0.25). The null hypothesis is
/// stationarity, rejected when the statistic exceeds the 5% critical value.
pub fn kpss_test(values: &[f64], regression: KpssRegression) -> Result<StationarityResult> {
    let n = values.len();
    if n < 12 {
        return Err(Error::InsufficientData {
            required: 12,
            actual: n,
        });
    }

    let residuals: Vec<f64> = match regression {
        KpssRegression::Level => {
            let m = mean(values);
            values.iter().map(|v| v - m).collect()
        }
        KpssRegression::Trend => {
            let x: Vec<Vec<f64>> = (0..n).map(|t| vec![1.0, t as f64]).collect();
            let fit = ols(&x, values)?;
            (0..n)
                .map(|t| values[t] - fit.coefficients[0] - fit.coefficients[1] * t as f64)
                .collect()
        }
    };

    let nf = n as f64;
    let bandwidth = (4.0 * (nf / 100.0).powf(0.25)).floor() as usize;
    let gamma = |l: usize| -> f64 {
        residuals[l..]
            .iter()
            .zip(&residuals[..n - l])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / nf
    };
    let mut lrv = gamma(0);
    for l in 1..=bandwidth.min(n - 1) {
        lrv += 2.0 * (1.0 - l as f64 / (bandwidth as f64 + 1.0)) * gamma(l);
    }
    if lrv <= 0.0 {
        return Err(Error::Degenerate(
            "long-run variance is not positive".into(),
        ));
    }

    let mut cumsum = 0.0;
    let mut sum_sq = 0.0;
    for &e in &residuals {
        cumsum += e;
        sum_sq += cumsum * cumsum;
    }
    let statistic = sum_sq / (nf * nf * lrv);

    let critical_values = match regression {
        KpssRegression::Level => KPSS_LEVEL,
        KpssRegression::Trend => KPSS_TREND,
    };
    let p_value_band = if statistic >= critical_values.pct_1 {
        (0.0, 0.01)
    } else if statistic >= critical_values.pct_5 {
        (0.01, 0.05)
    } else if statistic >= critical_values.pct_10 {
        (0.05, 0.10)
    } else {
        (0.10, 1.0)
    };
    let decision_at_5pct = if statistic > critical_values.pct_5 {
        Decision::RejectNull
    } else {
        Decision::FailToReject
    };
    Ok(StationarityResult {
        test_name: TestName::Kpss,
        statistic,
        critical_values,
        p_value_band,
        decision_at_5pct,
    })
}

struct OlsFit {
    coefficients: Vec<f64>,
    std_errors: Vec<f64>,
}

/// OLS through normal equations with Gauss-Jordan inversion. Small systems
/// only; a pivot below 1e-10 of the column scale reports a singular matrix.
fn ols(x: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let n = x.len();
    let k = x[0].len();
    if n <= k {
        return Err(Error::InsufficientData {
            required: k + 1,
            actual: n,
        });
    }

    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..k {
            xty[i] += row[i] * yi;
            for j in 0..k {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }

    let scale = xtx
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);

    // invert via Gauss-Jordan on [XtX | I]
    let mut aug = vec![vec![0.0; 2 * k]; k];
    for i in 0..k {
        aug[i][..k].copy_from_slice(&xtx[i]);
        aug[i][k + i] = 1.0;
    }
    for col in 0..k {
        let mut pivot = col;
        for r in (col + 1)..k {
            if aug[r][col].abs() > aug[pivot][col].abs() {
                pivot = r;
            }
        }
        if aug[pivot][col].abs() < 1e-10 * scale {
            return Err(Error::Degenerate("singular regression matrix".into()));
        }
        aug.swap(col, pivot);
        let d = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = aug[r][col];
            if f != 0.0 {
                for c in 0..2 * k {
                    aug[r][c] -= f * aug[col][c];
                }
            }
        }
    }
    let inv: Vec<Vec<f64>> = aug.into_iter().map(|row| row[k..].to_vec()).collect();

    let coefficients: Vec<f64> = (0..k)
        .map(|i| inv[i].iter().zip(&xty).map(|(a, b)| a * b).sum())
        .collect();
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let fitted: f64 = row.iter().zip(&coefficients).map(|(a, b)| a * b).sum();
            (yi - fitted) * (yi - fitted)
        })
        .sum();
    let s2 = rss / (n - k) as f64;
    let std_errors = (0..k).map(|i| (s2 * inv[i][i]).sqrt()).collect();
    Ok(OlsFit {
        coefficients,
        std_errors,
    })
}
