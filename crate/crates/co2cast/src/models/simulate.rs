//! Seeded ARMA path generator, used as the oracle for parameter-recovery
//! and interval-coverage studies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::models::arima::{is_invertible, is_stationary};
use crate::models::ArimaOrder;

/// Innovations discarded before the kept segment.
const BURN_IN: usize = 100;

/// Simulates an ARIMA path with Gaussian innovations: an ARMA recursion on
/// the stationary scale, integrated `order.d` times. Identical inputs give
/// identical paths.
pub fn simulate_arma(
    order: ArimaOrder,
    ar: &[f64],
    ma: &[f64],
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    order.validate()?;
    if ar.len() != order.p || ma.len() != order.q {
        return Err(Error::Domain(format!(
            "coefficient counts ({}, {}) disagree with order {}",
            ar.len(),
            ma.len(),
            order
        )));
    }
    if !is_stationary(ar) {
        return Err(Error::Domain(
            "AR coefficients are outside the stationary region".into(),
        ));
    }
    if !is_invertible(ma) {
        return Err(Error::Domain(
            "MA coefficients are outside the invertible region".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Domain("path length must be at least 1".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma {sigma} must be positive")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("validated sigma");
    let total = BURN_IN + n;
    let mut innovations = Vec::with_capacity(total);
    let mut path = Vec::with_capacity(total);
    for t in 0..total {
        let e: f64 = noise.sample(&mut rng);
        let mut x = e;
        for (i, &phi) in ar.iter().enumerate() {
            if t >= i + 1 {
                x += phi * path[t - 1 - i];
            }
        }
        for (j, &theta) in ma.iter().enumerate() {
            if t >= j + 1 {
                x += theta * innovations[t - 1 - j];
            }
        }
        innovations.push(e);
        path.push(x);
    }

    let mut kept = path.split_off(BURN_IN);
    for _ in 0..order.d {
        let mut acc = 0.0;
        for v in kept.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok(kept)
}
