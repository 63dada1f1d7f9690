use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{CouponError, Result};
use crate::numeric::compensated_sum;
use crate::params::CollectorParams;

/// Moments of `W` and the auxiliary sums used by the approximations.
///
/// `lambda_nj[j - 1]` holds `sum_{i=m+1}^{n} (1 - i/n)^j` and `a_nj[j - 1]`
/// holds `sum_{k=m+1}^{n} ((n - k)/k)^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub mu_n: f64,
    pub sigma2_n: f64,
    pub lambda_n: f64,
    pub lambda_prime_n: f64,
    pub lambda_nj: Vec<f64>,
    pub a_nj: Vec<f64>,
}

impl MomentSummary {
    pub fn sigma_n(&self) -> f64 {
        self.sigma2_n.sqrt()
    }

    /// `lambda_{n,j}` for `1 <= j <= J`.
    pub fn lambda_nj(&self, j: usize) -> f64 {
        self.lambda_nj[j - 1]
    }

    /// `a_{n,j}` for `1 <= j <= J`.
    pub fn a_nj(&self, j: usize) -> f64 {
        self.a_nj[j - 1]
    }
}

/// Computes the moment summary with sums up to power `j_max`.
pub fn moments(params: CollectorParams, j_max: usize) -> Result<MomentSummary> {
    if j_max < 2 {
        return Err(CouponError::InvalidParams(format!("J = {j_max} must be at least 2")));
    }
    let n = params.n();
    let m = params.m();
    let nf = n as f64;
    // Terms grow as k decreases, so sum from k = n downward.
    let ratios: Vec<f64> = (m + 1..=n).rev().map(|k| (n - k) as f64 / k as f64).collect();
    let a_nj: Vec<f64> = (1..=j_max as i32)
        .map(|j| compensated_sum(ratios.iter().map(|r| r.powi(j))))
        .collect();
    let fractions: Vec<f64> = (0..n - m).map(|d| d as f64 / nf).collect();
    let lambda_nj: Vec<f64> = (1..=j_max as i32)
        .map(|j| compensated_sum(fractions.iter().map(|f| f.powi(j))))
        .collect();
    let sigma2_n = nf * compensated_sum((m + 1..=n).rev().map(|k| (n - k) as f64 / (k * k) as f64));
    let target = (n - m) as f64;
    Ok(MomentSummary {
        mu_n: target + a_nj[0],
        sigma2_n,
        lambda_n: target * (target - 1.0) / (2.0 * nf),
        lambda_prime_n: a_nj[0],
        lambda_nj,
        a_nj,
    })
}

/// The same sums in exact rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub mu_n: BigRational,
    pub sigma2_n: BigRational,
    pub lambda_nj: Vec<BigRational>,
    pub a_nj: Vec<BigRational>,
}

pub fn moments_exact(params: CollectorParams, j_max: usize) -> ExactMoments {
    let n = params.n();
    let m = params.m();
    let big = |v: u64| BigInt::from(v);
    let ratio = |a: u64, b: u64| BigRational::new(big(a), big(b));
    let mut mu = BigRational::zero();
    let mut sigma2 = BigRational::zero();
    let mut a_nj = vec![BigRational::zero(); j_max];
    let mut lambda_nj = vec![BigRational::zero(); j_max];
    for k in m + 1..=n {
        mu += ratio(n, k);
        sigma2 += ratio(n * (n - k), k * k);
        let r = ratio(n - k, k);
        let l = ratio(n - k, n);
        let mut rp = BigRational::one();
        let mut lp = BigRational::one();
        for j in 0..j_max {
            rp *= &r;
            lp *= &l;
            a_nj[j] += &rp;
            lambda_nj[j] += &lp;
        }
    }
    ExactMoments { mu_n: mu, sigma2_n: sigma2, lambda_nj, a_nj }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn p(n: u64, m: u64) -> CollectorParams {
        CollectorParams::new(n, m).unwrap()
    }

    #[test]
    fn six_coupons() {
        let s = moments(p(6, 0), 3).unwrap();
        assert!((s.mu_n - 14.7).abs() < 1e-13);
        assert!((s.sigma2_n - 38.99).abs() < 1e-12);
        let e = moments_exact(p(6, 0), 3);
        assert_eq!(e.mu_n, BigRational::new(147.into(), 10.into()));
        assert_eq!(e.sigma2_n, BigRational::new(3899.into(), 100.into()));
    }

    #[test]
    fn poisson_scale_lambda() {
        let s = moments(p(100, 90), 2).unwrap();
        assert!((s.lambda_n - 0.45).abs() < 1e-15);
        assert!((s.lambda_nj(1) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn single_draw_case() {
        let s = moments(p(2, 1), 2).unwrap();
        assert_eq!(s.mu_n, 1.0);
        assert_eq!(s.sigma2_n, 0.0);
        assert_eq!(s.lambda_prime_n, 0.0);
    }

    #[test]
    fn rejects_small_j() {
        assert!(moments(p(5, 1), 1).is_err());
    }

    #[test]
    fn float_sums_match_exact() {
        for (n, m) in [(12, 0), (12, 5), (30, 29), (37, 20)] {
            let f = moments(p(n, m), 5).unwrap();
            let e = moments_exact(p(n, m), 5);
            let close = |a: f64, b: &BigRational| {
                let b = b.to_f64().unwrap();
                (a - b).abs() <= 1e-14 * b.abs().max(1.0)
            };
            assert!(close(f.mu_n, &e.mu_n));
            assert!(close(f.sigma2_n, &e.sigma2_n));
            for j in 0..5 {
                assert!(close(f.a_nj[j], &e.a_nj[j]));
                assert!(close(f.lambda_nj[j], &e.lambda_nj[j]));
            }
        }
    }

    #[test]
    fn identities_hold() {
        for (n, m) in [(50, 0), (1000, 3), (1000, 500), (10_000, 9_800)] {
            let s = moments(p(n, m), 3).unwrap();
            assert!((s.lambda_prime_n - (s.mu_n - (n - m) as f64)).abs() <= 1e-9 * s.mu_n);
            let a2 = s.sigma2_n - s.a_nj(1);
            assert!((s.a_nj(2) - a2).abs() <= 1e-12 * s.sigma2_n);
            assert!((s.lambda_n - s.lambda_nj(1)).abs() <= 1e-12 * s.lambda_n.max(1e-300));
        }
    }
}
