//! Three independent routes to the exact law of the waiting time `W`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CouponError, Result};
use crate::lattice::LatticePmf;
use crate::params::CollectorParams;

const FLUSH: f64 = 1e-300;

/// Law of `W` as the sum of independent geometric variables with success
/// probabilities `k/n`, `k = m+1..n`.
///
/// Each factor is folded in with the recursive filter
/// `r(i) = (1 - p) r(i-1) + acc(i)`, `new(i) = p r(i)`, and cut once the
/// remaining geometric tail `(1 - p) r(i)` drops below `tail_eps / (n - m)`.
pub fn exact_pmf_convolution(params: CollectorParams, tail_eps: f64) -> Result<LatticePmf> {
    if !(tail_eps > 0.0 && tail_eps <= 1e-6) {
        return Err(CouponError::InvalidParams(format!(
            "tail_eps = {tail_eps} must lie in (0, 1e-6]"
        )));
    }
    let n = params.n();
    let m = params.m();
    if m == n - 1 {
        return Ok(LatticePmf::point_mass(1));
    }
    let budget = tail_eps / (n - m) as f64;
    let mut acc = vec![1.0];
    let mut deficit = 0.0;
    for k in (m + 1..n).rev() {
        let p = k as f64 / n as f64;
        let q = (n - k) as f64 / n as f64;
        let len = acc.len();
        let mut next = Vec::with_capacity(len + (40.0 / p) as usize);
        let mut r = 0.0;
        let mut i = 0;
        loop {
            r = q * r + acc.get(i).copied().unwrap_or(0.0);
            if r < FLUSH {
                deficit += r;
                r = 0.0;
            }
            next.push(p * r);
            if i + 1 >= len && q * r <= budget {
                deficit += q * r;
                break;
            }
            i += 1;
        }
        acc = next;
    }
    LatticePmf::new((n - m) as i64, acc, deficit)
}

/// Law of `W` on `n-m..=t_max` from the chain of distinct-coupon counts.
pub fn exact_pmf_markov(params: CollectorParams, t_max: u64) -> Result<LatticePmf> {
    let n = params.n();
    let m = params.m();
    let target = n - m;
    if t_max < target {
        return Err(CouponError::InvalidParams(format!(
            "t_max = {t_max} is below the minimum waiting time {target}"
        )));
    }
    let nf = n as f64;
    let top = (target - 1) as usize;
    let mut dist = vec![0.0; top + 1];
    dist[0] = 1.0;
    let mut weights = Vec::with_capacity((t_max - target + 1) as usize);
    for t in 0..t_max {
        if t + 1 >= target {
            weights.push(dist[top] * (m + 1) as f64 / nf);
        }
        for d in (1..=top.min(t as usize + 1)).rev() {
            dist[d] = dist[d] * d as f64 / nf + dist[d - 1] * (n - d as u64 + 1) as f64 / nf;
        }
        dist[0] = 0.0;
    }
    LatticePmf::from_truncated(target as i64, weights)
}

/// `P(W <= t)` for `t = 0..=t_max` in exact arithmetic, by the same chain
/// as [`exact_pmf_markov`].
pub fn cdf_markov_exact(params: CollectorParams, t_max: u64) -> Vec<BigRational> {
    let n = params.n();
    let m = params.m();
    let target = (n - m) as usize;
    let ratio = |a: u64| BigRational::new(BigInt::from(a), BigInt::from(n));
    let mut dist = vec![BigRational::zero(); target];
    dist[0] = BigRational::one();
    let mut cdf = vec![BigRational::zero()];
    let mut total = BigRational::zero();
    for _ in 0..t_max {
        total += &dist[target - 1] * ratio(m + 1);
        cdf.push(total.clone());
        for d in (1..target).rev() {
            dist[d] = &dist[d] * ratio(d as u64) + &dist[d - 1] * ratio(n - d as u64 + 1);
        }
        dist[0] = BigRational::zero();
    }
    cdf
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `P(W <= t)` as an exact fraction, counting length-`t` draw sequences
/// with at least `n - m` distinct values.
pub fn cdf_inclusion_exclusion_exact(params: CollectorParams, t: u64) -> Result<BigRational> {
    let n = params.n();
    let m = params.m();
    if n > 30 || t > 200 {
        return Err(CouponError::InvalidParams(format!(
            "exact counting supports n <= 30 and t <= 200, got n = {n}, t = {t}"
        )));
    }
    if t == 0 {
        return Err(CouponError::InvalidParams("t must be at least 1".into()));
    }
    let mut count = BigInt::zero();
    for d in (n - m)..=n.min(t) {
        let mut surj = BigInt::zero();
        for j in 0..=d {
            let term = binomial(d, j) * BigInt::from(d - j).pow(t as u32);
            if j % 2 == 0 {
                surj += term;
            } else {
                surj -= term;
            }
        }
        count += binomial(n, d) * surj;
    }
    debug_assert!(!count.is_negative());
    Ok(BigRational::new(count, BigInt::from(n).pow(t as u32)))
}

pub fn cdf_inclusion_exclusion(params: CollectorParams, t: u64) -> Result<f64> {
    let exact = cdf_inclusion_exclusion_exact(params, t)?;
    Ok(exact.to_f64().unwrap_or(f64::NAN))
}

const ENUMERATION_LIMIT: f64 = 1e6;

/// `P(W - (n-m) = k)` by summing over all weak compositions of `k` into
/// `n - m - 1` parts.
pub fn shifted_pmf_bruteforce(params: CollectorParams, k: u64) -> Result<f64> {
    let n = params.n();
    let m = params.m();
    let parts = (n - m - 1) as usize;
    if parts == 0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    let size = (1..=k).fold(1.0, |acc, i| acc * (i + parts as u64 - 1) as f64 / i as f64);
    if size > ENUMERATION_LIMIT {
        return Err(CouponError::Infeasible { size, limit: ENUMERATION_LIMIT });
    }
    let lead: f64 = (m + 1..=n).map(|i| i as f64 / n as f64).product();
    let rates: Vec<f64> = (m + 1..n).map(|i| 1.0 - i as f64 / n as f64).collect();
    Ok(lead * compositions(&rates, k, 1.0))
}

fn compositions(rates: &[f64], remaining: u64, prefix: f64) -> f64 {
    match rates {
        [] => 0.0,
        [last] => prefix * last.powi(remaining as i32),
        [first, rest @ ..] => {
            let mut total = 0.0;
            let mut power = 1.0;
            for e in 0..=remaining {
                total += compositions(rest, remaining - e, prefix * power);
                power *= first;
            }
            total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64, m: u64) -> CollectorParams {
        CollectorParams::new(n, m).unwrap()
    }

    fn frac(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn two_coupons() {
        let w = exact_pmf_convolution(p(2, 0), 1e-12).unwrap();
        assert_eq!(w.offset(), 2);
        assert_eq!(&w.weights()[..3], &[0.5, 0.25, 0.125]);
        assert!(w.tail_deficit() <= 1e-12);
        let mk = exact_pmf_markov(p(2, 0), 10).unwrap();
        for t in 2..=10 {
            assert!((w.get(t) - mk.get(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_draw_is_point_mass() {
        let w = exact_pmf_convolution(p(3, 2), 1e-12).unwrap();
        assert_eq!(w, LatticePmf::point_mass(1));
        let mk = exact_pmf_markov(p(5, 4), 1).unwrap();
        assert_eq!(mk.get(1), 1.0);
    }

    #[test]
    fn three_coupons_in_three_draws() {
        let w = exact_pmf_convolution(p(3, 0), 1e-12).unwrap();
        assert!((w.cdf(3) - 2.0 / 9.0).abs() < 1e-15);
        let mk = exact_pmf_markov(p(3, 0), 3).unwrap();
        assert!((mk.total_mass() - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(cdf_inclusion_exclusion_exact(p(3, 0), 3).unwrap(), frac(2, 9));
        assert_eq!(cdf_markov_exact(p(3, 0), 3)[3], frac(2, 9));
    }

    #[test]
    fn inclusion_exclusion_examples() {
        assert_eq!(cdf_inclusion_exclusion_exact(p(4, 3), 1).unwrap(), frac(1, 1));
        assert_eq!(cdf_inclusion_exclusion_exact(p(2, 0), 4).unwrap(), frac(7, 8));
        assert!(cdf_inclusion_exclusion(p(31, 0), 5).is_err());
        assert!(cdf_inclusion_exclusion(p(5, 0), 201).is_err());
        assert!(cdf_inclusion_exclusion(p(5, 0), 0).is_err());
    }

    #[test]
    fn bruteforce_examples() {
        assert!((shifted_pmf_bruteforce(p(4, 2), 0).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(shifted_pmf_bruteforce(p(9, 8), 0).unwrap(), 1.0);
        assert_eq!(shifted_pmf_bruteforce(p(9, 8), 2).unwrap(), 0.0);
        let w = exact_pmf_convolution(p(4, 1), 1e-12).unwrap();
        let b = shifted_pmf_bruteforce(p(4, 1), 2).unwrap();
        assert!((w.get(3 + 2) - b).abs() < 1e-12);
        assert!(shifted_pmf_bruteforce(p(60, 0), 40).is_err());
    }

    #[test]
    fn argument_validation() {
        assert!(exact_pmf_convolution(p(5, 0), 0.0).is_err());
        assert!(exact_pmf_convolution(p(5, 0), 1e-5).is_err());
        assert!(exact_pmf_markov(p(5, 0), 4).is_err());
    }

    #[test]
    fn deficit_respects_budget() {
        for eps in [1e-6, 1e-9, 1e-12] {
            let w = exact_pmf_convolution(p(50, 3), eps).unwrap();
            assert!(w.tail_deficit() <= eps);
            assert!(w.tail_deficit() > 0.0);
        }
    }
}
