//! Total variation and Kolmogorov distances on the integer lattice.

use crate::approx::ContinuousCdf;
use crate::error::{CouponError, Result};
use crate::lattice::{LatticePmf, SignedLatticeMeasure};
use crate::numeric::NeumaierSum;

/// Where a distance attains its maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Atom(i64),
    Point(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult {
    pub value: f64,
    pub attained_at: Location,
    /// Bound on the error caused by mass outside the stored ranges.
    pub truncation_slack: f64,
}

/// Strictly increasing map `k -> slope * k + intercept` from lattice atoms to
/// the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    slope: f64,
    intercept: f64,
}

impl AffineMap {
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite() && intercept.is_finite()) {
            return Err(CouponError::InvalidParams(format!(
                "atom map needs a positive finite slope, got {slope}"
            )));
        }
        Ok(Self { slope, intercept })
    }

    pub fn identity() -> Self {
        Self { slope: 1.0, intercept: 0.0 }
    }

    /// `k -> (k - center) / scale`.
    pub fn standardize(center: f64, scale: f64) -> Result<Self> {
        Self::new(1.0 / scale, -center / scale)
    }

    pub fn apply(&self, k: i64) -> f64 {
        self.slope * k as f64 + self.intercept
    }
}

fn half_l1<F: Fn(i64) -> f64, G: Fn(i64) -> f64>(lo: i64, hi: i64, p: F, q: G) -> (f64, i64) {
    let mut acc = NeumaierSum::new();
    let mut best = (f64::NEG_INFINITY, lo);
    for k in lo..=hi {
        let d = (p(k) - q(k)).abs();
        acc.add(d);
        if d > best.0 {
            best = (d, k);
        }
    }
    (0.5 * acc.value(), best.1)
}

/// `1/2 sum_k |p{k} - q{k}|` over the union of stored ranges.
pub fn d_tv_lattice(p: &LatticePmf, q: &LatticePmf) -> DistanceResult {
    let lo = p.offset().min(q.offset());
    let hi = p.last().max(q.last());
    let (value, at) = half_l1(lo, hi, |k| p.get(k), |k| q.get(k));
    DistanceResult {
        value,
        attained_at: Location::Atom(at),
        truncation_slack: 0.5 * (p.tail_deficit() + q.tail_deficit()),
    }
}

/// Half-L1 distance between a law and a signed measure of (nearly) unit
/// mass; the mass defect is added to the slack.
pub fn d_tv_signed(p: &LatticePmf, nu: &SignedLatticeMeasure) -> Result<DistanceResult> {
    let mass = nu.total_mass();
    if (mass - 1.0).abs() > 1e-6 {
        return Err(CouponError::MassMismatch { mass, tol: 1e-6 });
    }
    let lo = p.offset().min(nu.offset());
    let hi = p.last().max(nu.last());
    let (value, at) = half_l1(lo, hi, |k| p.get(k), |k| nu.get(k));
    Ok(DistanceResult {
        value,
        attained_at: Location::Atom(at),
        truncation_slack: 0.5 * (p.tail_deficit() + (mass - 1.0).abs()),
    })
}

/// Sup distance between the distribution function of `p` pushed through
/// `map` and a continuous `f`, checked on both sides of every jump.
pub fn d_k_lattice_vs_continuous<F: ContinuousCdf + ?Sized>(
    p: &LatticePmf,
    map: AffineMap,
    f: &F,
) -> DistanceResult {
    let mut below = 0.0;
    let mut best = (f64::NEG_INFINITY, p.offset());
    for (i, above) in p.cumulative().into_iter().enumerate() {
        let k = p.offset() + i as i64;
        let fx = f.cdf(map.apply(k));
        let d = (above - fx).abs().max((below - fx).abs());
        if d > best.0 {
            best = (d, k);
        }
        below = above;
    }
    DistanceResult {
        value: best.0,
        attained_at: Location::Point(map.apply(best.1)),
        truncation_slack: p.tail_deficit(),
    }
}

/// Kolmogorov distance between two lattice laws.
pub fn d_k_lattice(p: &LatticePmf, q: &LatticePmf) -> DistanceResult {
    let lo = p.offset().min(q.offset());
    let hi = p.last().max(q.last());
    let mut cp = NeumaierSum::new();
    let mut cq = NeumaierSum::new();
    let mut best = (0.0, lo);
    for k in lo..=hi {
        cp.add(p.get(k));
        cq.add(q.get(k));
        let d = (cp.value() - cq.value()).abs();
        if d > best.0 {
            best = (d, k);
        }
    }
    DistanceResult {
        value: best.0,
        attained_at: Location::Atom(best.1),
        truncation_slack: p.tail_deficit().max(q.tail_deficit()),
    }
}

/// `d_TV(X, X + 1) = 1/2 sum_k |p{k} - p{k-1}|`.
pub fn d_tv_shift(p: &LatticePmf) -> DistanceResult {
    let (value, at) = half_l1(p.offset(), p.last() + 1, |k| p.get(k), |k| p.get(k - 1));
    DistanceResult {
        value,
        attained_at: Location::Atom(at),
        truncation_slack: p.tail_deficit(),
    }
}
