use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CouponError, Result};
use crate::lattice::SignedLatticeMeasure;
use crate::moments::{moments, moments_exact};
use crate::numeric::NeumaierSum;
use crate::params::CollectorParams;
use crate::special::poisson_pmf;

use super::polynomial::{Coefficient, Poly};

/// Which side of `a_{n,2} = 1` the expansion is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiRegime {
    /// `a_{n,2} > 1`: the expansion targets `W - (n-m) + floor(a_{n,2})`.
    A2Large,
    /// `a_{n,2} < 1`: the expansion targets `W - (n-m)` directly.
    A2Small,
}

impl ChiRegime {
    /// Number of terms `L` kept in the exponential series.
    pub fn exp_order(self, r: usize) -> usize {
        match self {
            ChiRegime::A2Large => r,
            ChiRegime::A2Small => 3 * r - 2,
        }
    }

    /// Length minus one of the stored coefficient vector.
    pub fn coeff_degree(self, r: usize) -> usize {
        match self {
            ChiRegime::A2Large => r * r,
            ChiRegime::A2Small => 3 * r * r - r,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChiRegime::A2Large => "a2_large",
            ChiRegime::A2Small => "a2_small",
        }
    }
}

/// Polynomial family used when writing the measure as Poisson times a
/// polynomial in `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharlierForm {
    /// `sum_k C(r,k) C(j,k) k! lambda^{-2k}`.
    AsPrinted,
    /// `sum_k C(r,k) C(j,k) k! (-lambda)^{-k}`.
    Classical,
}

/// How the coefficients enter the Charlier-form sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignForm {
    /// `sum_{r >= 0} (-1)^r a_r C_r`.
    Alternating,
    /// `1 + sum_{r >= 1} (-1)^{r+1} a_r C_r`.
    LeadingOne,
}

fn charlier_sum(r: usize, j: u64, scale: f64) -> f64 {
    // term_k = C(r,k) C(j,k) k! scale^k, built incrementally
    let mut term = 1.0;
    let mut acc = NeumaierSum::new();
    acc.add(term);
    for k in 1..=r.min(j as usize) {
        term *= (r - k + 1) as f64 * (j - k as u64 + 1) as f64 / k as f64 * scale;
        acc.add(term);
    }
    acc.value()
}

/// `sum_{k=0}^{r} C(r,k) C(j,k) k! lambda^{-2k}`.
pub fn charlier_polynomial(r: usize, j: u64, lambda: f64) -> f64 {
    charlier_sum(r, j, lambda.powi(-2))
}

/// The classical Charlier polynomial `sum_k C(r,k) C(j,k) k! (-lambda)^{-k}`.
pub fn charlier_classical(r: usize, j: u64, lambda: f64) -> f64 {
    charlier_sum(r, j, -1.0 / lambda)
}

/// Classical Charlier polynomials of orders `0..=r_max` at `(j, lambda)` by
/// the three-term recurrence
/// `lambda C_{r+1} = (r + lambda - j) C_r - r C_{r-1}`.
pub fn charlier_classical_run(r_max: usize, j: f64, lambda: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(r_max + 1);
    out.push(1.0);
    if r_max >= 1 {
        out.push(1.0 - j / lambda);
    }
    for r in 1..r_max {
        let next = ((r as f64 + lambda - j) * out[r] - r as f64 * out[r - 1]) / lambda;
        out.push(next);
    }
    out
}

/// The exact classical Charlier polynomial at rational arguments.
pub fn charlier_classical_exact(r: usize, j: u64, lambda: &BigRational) -> BigRational {
    let scale = -BigRational::one() / lambda.clone();
    let mut term = BigRational::one();
    let mut acc = BigRational::one();
    for k in 1..=r.min(j as usize) {
        term = term
            * BigRational::from_i64(((r - k + 1) as u64 * (j - k as u64 + 1)) as i64)
            / BigRational::from_i64(k as i64)
            * scale.clone();
        acc = acc + term.clone();
    }
    acc
}

/// The polynomial `h_R` from the cumulants `a_{n,1..R}`.
pub fn h_polynomial<T: Coefficient>(regime: ChiRegime, a: &[T], floor_a2: i64, r: usize) -> Poly<T> {
    let a2 = a[1].clone();
    let (first, second) = match regime {
        ChiRegime::A2Large => {
            let frac = a2 - T::from_i64(floor_a2);
            (-frac.clone(), frac / T::from_i64(2))
        }
        ChiRegime::A2Small => (-a2.clone(), a2 / T::from_i64(2)),
    };
    let mut coeffs = vec![T::zero(), first, second];
    for s in 3..=r {
        let shift = match regime {
            ChiRegime::A2Large => {
                let sign = if s % 2 == 1 { 1 } else { -1 };
                T::from_i64(sign * floor_a2)
            }
            ChiRegime::A2Small => T::zero(),
        };
        coeffs.push((a[s - 1].clone() + shift) / T::from_i64(s as i64));
    }
    Poly::new(coeffs)
}

/// Coefficients of `H_R = sum_{l <= L} h_R^l / l!`, padded with zeros to
/// the regime's nominal degree.
pub fn expansion_coefficients<T: Coefficient>(
    regime: ChiRegime,
    a: &[T],
    floor_a2: i64,
    r: usize,
) -> Vec<T> {
    let h = h_polynomial(regime, a, floor_a2, r);
    let mut coeffs = h.exp_truncated(regime.exp_order(r)).into_coeffs();
    let degree = regime.coeff_degree(r).max(coeffs.len() - 1);
    coeffs.resize(degree + 1, T::zero());
    coeffs
}

/// The signed measure `nu_R{j} = sum_r a_r Delta^r Po(lambda){j}` with
/// `Delta p{j} = p{j-1} - p{j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonCharlierMeasure {
    pub lambda: f64,
    pub r: usize,
    pub regime: ChiRegime,
    pub coeffs: Vec<f64>,
    pub c: i64,
}

impl PoissonCharlierMeasure {
    /// `[lo, hi]` covering `lambda +- hint * sqrt(lambda)` plus room for the
    /// highest difference order.
    pub fn window(&self, hint: u64) -> (i64, i64) {
        let spread = hint as f64 * self.lambda.sqrt();
        let pad = 2 * self.coeffs.len() as i64 + 20;
        let lo = ((self.lambda - spread).floor() as i64 - pad).max(0);
        let hi = (self.lambda + spread).ceil() as i64 + pad;
        (lo, hi)
    }

    /// Bound on the rounding error of [`Self::signed_pmf_by_differences`],
    /// relative to the largest Poisson mass: `eps sum_r |a_r| 2^r`.
    pub fn differencing_error_bound(&self) -> f64 {
        let spread: f64 = self.coeffs.iter().enumerate().map(|(r, a)| a.abs() * 2f64.powi(r as i32)).sum();
        f64::EPSILON * spread
    }

    /// Masses on `lo..=hi`. Uses literal differencing when its rounding
    /// bound is below `1e-13` and the Charlier recurrence otherwise.
    pub fn signed_pmf(&self, lo: i64, hi: i64) -> SignedLatticeMeasure {
        if self.differencing_error_bound() <= 1e-13 {
            self.signed_pmf_by_differences(lo, hi)
        } else {
            self.signed_pmf_by_recurrence(lo, hi)
        }
    }

    /// Masses on `lo..=hi` from `Delta^r Po{j} = (-1)^r Po{j} C_r(j, lambda)`
    /// with classical Charlier polynomials evaluated by recurrence. Accurate
    /// for moderate and large `lambda`; unstable in `r` when `lambda` is small
    /// and `j < lambda`.
    pub fn signed_pmf_by_recurrence(&self, lo: i64, hi: i64) -> SignedLatticeMeasure {
        let degree = self.coeffs.len() - 1;
        let weights = (lo..=hi)
            .map(|j| {
                let base = poisson_pmf(self.lambda, j as u64);
                if base == 0.0 {
                    return 0.0;
                }
                let run = charlier_classical_run(degree, j as f64, self.lambda);
                let poly: NeumaierSum = run
                    .iter()
                    .zip(&self.coeffs)
                    .enumerate()
                    .map(|(r, (c, a))| if r % 2 == 0 { a * c } else { -a * c })
                    .collect();
                base * poly.value()
            })
            .collect();
        SignedLatticeMeasure::new(lo, weights).expect("finite weights")
    }

    /// Masses on `lo..=hi` by repeated literal differencing of the Poisson
    /// pmf. Loses roughly `r log10(2 sqrt(lambda))` digits at order `r`.
    pub fn signed_pmf_by_differences(&self, lo: i64, hi: i64) -> SignedLatticeMeasure {
        let mut current: Vec<f64> = (0..=hi as u64).map(|j| poisson_pmf(self.lambda, j)).collect();
        let mut total = vec![0.0; current.len()];
        for (r, a) in self.coeffs.iter().enumerate() {
            if r > 0 {
                let prev = current.clone();
                for j in 0..current.len() {
                    let left = if j == 0 { 0.0 } else { prev[j - 1] };
                    current[j] = left - prev[j];
                }
            }
            for (t, c) in total.iter_mut().zip(&current) {
                *t += a * c;
            }
        }
        SignedLatticeMeasure::new(lo, total[lo as usize..].to_vec()).expect("finite weights")
    }

    /// Masses on `lo..=hi` written as Poisson times a Charlier-polynomial
    /// sum under the given conventions.
    pub fn signed_pmf_charlier_form(
        &self,
        lo: i64,
        hi: i64,
        form: CharlierForm,
        sign: SignForm,
    ) -> SignedLatticeMeasure {
        let weights = (lo..=hi)
            .map(|j| {
                let poly = |r: usize| match form {
                    CharlierForm::AsPrinted => charlier_polynomial(r, j as u64, self.lambda),
                    CharlierForm::Classical => charlier_classical(r, j as u64, self.lambda),
                };
                let mut acc = NeumaierSum::new();
                match sign {
                    SignForm::Alternating => {
                        for (r, a) in self.coeffs.iter().enumerate() {
                            let s = if r % 2 == 0 { 1.0 } else { -1.0 };
                            acc.add(s * a * poly(r));
                        }
                    }
                    SignForm::LeadingOne => {
                        acc.add(1.0);
                        for (r, a) in self.coeffs.iter().enumerate().skip(1) {
                            let s = if r % 2 == 1 { 1.0 } else { -1.0 };
                            acc.add(s * a * poly(r));
                        }
                    }
                }
                poisson_pmf(self.lambda, j as u64) * acc.value()
            })
            .collect();
        SignedLatticeMeasure::new(lo, weights).expect("finite weights")
    }

    /// `exp(lambda z) H_R(z)` at `z = e^{it} - 1`.
    pub fn transform(&self, t: f64) -> Complex64 {
        let z = Complex64::new(t.cos() - 1.0, t.sin());
        let h = self.coeffs.iter().rev().fold(Complex64::zero(), |acc, &c| acc * z + c);
        (z * self.lambda).exp() * h
    }
}

/// Builds the Poisson–Charlier expansion of order `r` for `W` and emits its
/// signed pmf on a window of `support_hint` Poisson standard deviations.
///
/// The regime is chosen by `a_{n,2}` against 1; within `1e-6` of the
/// boundary the construction is refused.
pub fn build_poisson_charlier(
    params: CollectorParams,
    r: usize,
    support_hint: u64,
) -> Result<(PoissonCharlierMeasure, SignedLatticeMeasure)> {
    if r < 3 {
        return Err(CouponError::InvalidParams(format!("R = {r} must be at least 3")));
    }
    let s = moments(params, r)?;
    if s.sigma2_n <= 0.0 {
        return Err(CouponError::Precondition(format!(
            "variance vanishes at {params}; the expansion needs sigma_n^2 > 0"
        )));
    }
    let a2 = s.a_nj(2);
    if (a2 - 1.0).abs() < 1e-6 {
        return Err(CouponError::RegimeBoundary(a2));
    }
    let regime = if a2 > 1.0 { ChiRegime::A2Large } else { ChiRegime::A2Small };
    let floor_a2 = a2.floor() as i64;
    let coeffs = expansion_coefficients(regime, &s.a_nj, floor_a2, r);
    let c = match regime {
        ChiRegime::A2Large => floor_a2,
        ChiRegime::A2Small => 0,
    };
    let measure = PoissonCharlierMeasure { lambda: s.sigma2_n, r, regime, coeffs, c };
    let (lo, hi) = measure.window(support_hint);
    let pmf = measure.signed_pmf(lo, hi);
    Ok((measure, pmf))
}

/// Exact coefficients of `H_R` from rational cumulants.
pub fn expansion_coefficients_exact(
    params: CollectorParams,
    r: usize,
) -> Result<(ChiRegime, Vec<BigRational>)> {
    let e = moments_exact(params, r);
    let a2 = e.a_nj[1].clone();
    if a2 == BigRational::one() {
        return Err(CouponError::RegimeBoundary(1.0));
    }
    let regime = if a2 > BigRational::one() { ChiRegime::A2Large } else { ChiRegime::A2Small };
    let floor_a2 = a2.floor().to_integer().to_i64().expect("small a_n2");
    Ok((regime, expansion_coefficients(regime, &e.a_nj, floor_a2, r)))
}
