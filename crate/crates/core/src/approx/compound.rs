use crate::error::{CouponError, Result};
use crate::lattice::LatticePmf;
use crate::moments::moments;
use crate::params::CollectorParams;
use crate::special::{poisson_pmf, poisson_pmf_vec};

/// The law of `Z1 + 2 Z2` with independent `Z1 ~ Po(mu)`, `Z2 ~ Po(a/2)`,
/// used to approximate `W + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundPoissonDist {
    pub mu: f64,
    pub a: f64,
    pub c: i64,
}

impl CompoundPoissonDist {
    pub fn mean(&self) -> f64 {
        self.mu + self.a
    }

    pub fn variance(&self) -> f64 {
        self.mu + 2.0 * self.a
    }

    pub fn pmf(&self, k_max: u64) -> Result<LatticePmf> {
        compound_poisson_pmf(self.mu, self.a, k_max)
    }
}

/// Matches mean and variance of `W + c`: with `x = sigma_n^2 - mu_n`,
/// `c = floor(x)`, `a = x - c` and `mu = sigma_n^2 - 2a`.
///
/// `x` is formed as `a_{n,2} - (n - m)`, which carries the same value
/// without cancelling two large sums.
pub fn cp_parameters(params: CollectorParams) -> Result<CompoundPoissonDist> {
    let s = moments(params, 2)?;
    let a2 = s.a_nj(2);
    let floor_a2 = a2.floor();
    let a = a2 - floor_a2;
    let c = floor_a2 as i64 - params.target() as i64;
    let mu = s.sigma2_n - 2.0 * a;
    if mu <= 0.0 {
        return Err(CouponError::NonPositiveRate(mu));
    }
    Ok(CompoundPoissonDist { mu, a, c })
}

/// `pi{k} = sum_j Po(mu){k - 2j} Po(a/2){j}` for `k = 0..=k_max`.
pub fn compound_poisson_pmf(mu: f64, a: f64, k_max: u64) -> Result<LatticePmf> {
    if !(mu > 0.0 && mu.is_finite()) || !(a >= 0.0 && a.is_finite()) {
        return Err(CouponError::InvalidParams(format!(
            "compound Poisson needs mu > 0 and a >= 0, got mu = {mu}, a = {a}"
        )));
    }
    let single = poisson_pmf_vec(mu, k_max);
    let half = a / 2.0;
    let mut pairs = Vec::new();
    for j in 0..=k_max / 2 {
        let w = poisson_pmf(half, j);
        if w == 0.0 && j as f64 > half {
            break;
        }
        pairs.push(w);
    }
    let weights: Vec<f64> = (0..=k_max as usize)
        .map(|k| {
            let mut total = 0.0;
            for (j, &w) in pairs.iter().enumerate() {
                if 2 * j > k {
                    break;
                }
                total += single[k - 2 * j] * w;
            }
            total
        })
        .collect();
    LatticePmf::from_truncated(0, weights)
}

/// The same masses from `k pi{k} = mu pi{k-1} + a pi{k-2}`, started at
/// `pi{0} = e^{-mu - a/2}`. Only usable while that start does not underflow.
pub fn compound_poisson_recursive(mu: f64, a: f64, k_max: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max as usize + 1);
    out.push((-mu - a / 2.0).exp());
    for k in 1..=k_max as usize {
        let prev2 = if k >= 2 { out[k - 2] } else { 0.0 };
        out.push((mu * out[k - 1] + a * prev2) / k as f64);
    }
    out
}
