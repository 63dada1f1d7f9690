use crate::error::Result;
use crate::moments::moments;
use crate::params::CollectorParams;
use crate::special::{normal_cdf, poisson_pmf};

use super::ContinuousCdf;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StandardNormal;

impl ContinuousCdf for StandardNormal {
    fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x)
    }
}

/// Poisson law with mean `lambda_n` plus its first correction in
/// `lambda_{n,2}`, as an approximation to `P(W - (n-m) = k)`.
pub fn corrected_poisson_pmf(params: CollectorParams, k: u64) -> Result<f64> {
    let s = moments(params, 2)?;
    Ok(corrected_poisson_from(s.lambda_n, s.lambda_nj(2), k))
}

/// The same expansion from precomputed `lambda_n` and `lambda_{n,2}`.
pub fn corrected_poisson_from(lambda: f64, lambda2: f64, k: u64) -> f64 {
    let base = poisson_pmf(lambda, k);
    let half = lambda2 / 2.0;
    match k {
        0 | 1 => base * (1.0 - half),
        _ => base + (poisson_pmf(lambda, k - 2) - base) * half,
    }
}
