//! Statistical kernel: ranking, the exact sign test, normal quantiles,
//! Shapiro-Wilk, Z-normalization, subsampling and Q-Q data.
//!
//! Standard deviations use the `n − 1` denominator everywhere.

mod binomial;
mod normal;
mod normality;
mod rank;
mod shapiro;

use rand::seq::index;
use rand::Rng;

pub use binomial::{binomial_half_cdf, sign_test_p_value};
pub use normal::{inverse_normal_cdf, normal_cdf, normal_sf};
pub use normality::{normality_report, EmbeddingNormality, NormalityReport};
pub use rank::{average_ranks, centered_double_ranks, rank_dot, rank_sum_squares, MAX_RANK_LEN};
pub use shapiro::{shapiro_wilk, ShapiroWilk};

use crate::error::{Error, Result};
use crate::seed::stream_rng;

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n − 1` denominator).
pub fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

/// Rescale to mean 0 and sample standard deviation 1.
pub fn z_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::config("z-normalization needs at least two values"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite value at index {i}")));
    }
    let m = mean(values);
    let sd = sample_sd(values);
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::Numeric("cannot z-normalize a constant vector".into()));
    }
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}

/// `k` values drawn uniformly without replacement, in draw order.
pub fn subsample<T: Copy>(values: &[T], k: usize, seed: u64) -> Result<Vec<T>> {
    subsample_with(values, k, &mut stream_rng(seed, 0))
}

pub fn subsample_with<T: Copy, R: Rng + ?Sized>(
    values: &[T],
    k: usize,
    rng: &mut R,
) -> Result<Vec<T>> {
    if k > values.len() {
        return Err(Error::config(format!(
            "subsample of {k} requested from {} values",
            values.len()
        )));
    }
    Ok(index::sample(rng, values.len(), k)
        .into_iter()
        .map(|i| values[i])
        .collect())
}

/// Normal Q-Q pairs `(theoretical, sample)`: sorted sample values against
/// standard-normal quantiles at `(i − 0.5) / n`.
pub fn qq_points(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.len() < 2 {
        return Err(Error::config("Q-Q plot needs at least two values"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("NaN in Q-Q input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (inverse_normal_cdf((i as f64 + 0.5) / n), v))
        .collect())
}
