use num_complex::Complex64;

use crate::error::{CouponError, Result};
use crate::numeric::{compensated_sum, NeumaierSum};

const MASS_TOL: f64 = 1e-12;

/// A probability law on the integers `offset, offset + 1, ...`, stored as a
/// contiguous run of weights plus the mass known to lie outside the run.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePmf {
    offset: i64,
    weights: Vec<f64>,
    tail_deficit: f64,
}

impl LatticePmf {
    /// Checks that the weights are nonnegative and that, with the deficit,
    /// they account for unit mass.
    pub fn new(offset: i64, weights: Vec<f64>, tail_deficit: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(CouponError::InvalidParams("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(CouponError::InvalidParams(format!("weight {w} is not a probability")));
        }
        if !(tail_deficit.is_finite() && tail_deficit >= 0.0) {
            return Err(CouponError::InvalidParams(format!(
                "tail deficit {tail_deficit} must be nonnegative"
            )));
        }
        let mass = compensated_sum(weights.iter().copied()) + tail_deficit;
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(CouponError::MassMismatch { mass, tol: MASS_TOL });
        }
        Ok(Self { offset, weights, tail_deficit })
    }

    /// Builds a law from a truncated run, charging the missing mass to the
    /// tail deficit.
    pub fn from_truncated(offset: i64, weights: Vec<f64>) -> Result<Self> {
        let sum = compensated_sum(weights.iter().copied());
        Self::new(offset, weights, (1.0 - sum).max(0.0))
    }

    pub fn point_mass(at: i64) -> Self {
        Self { offset: at, weights: vec![1.0], tail_deficit: 0.0 }
    }

    /// Uniform law on `lo..=hi`.
    pub fn uniform(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(CouponError::InvalidParams(format!("empty range {lo}..={hi}")));
        }
        let len = (hi - lo + 1) as usize;
        Self::new(lo, vec![1.0 / len as f64; len], 0.0)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Largest stored support point.
    pub fn last(&self) -> i64 {
        self.offset + self.weights.len() as i64 - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail_deficit(&self) -> f64 {
        self.tail_deficit
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mass at `k`; zero outside the stored run.
    pub fn get(&self, k: i64) -> f64 {
        if k < self.offset {
            return 0.0;
        }
        self.weights.get((k - self.offset) as usize).copied().unwrap_or(0.0)
    }

    /// Cumulative masses `P(X <= offset + i)` for every stored index.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = NeumaierSum::new();
        self.weights
            .iter()
            .map(|&w| {
                acc.add(w);
                acc.value()
            })
            .collect()
    }

    pub fn cdf(&self, k: i64) -> f64 {
        if k < self.offset {
            return 0.0;
        }
        let end = ((k - self.offset) as usize + 1).min(self.weights.len());
        compensated_sum(self.weights[..end].iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    /// Mean of the stored part, normalised by its mass.
    pub fn mean(&self) -> f64 {
        let mass = self.total_mass();
        let first = compensated_sum(self.iter().map(|(k, w)| k as f64 * w));
        first / mass
    }

    /// Variance of the stored part, normalised by its mass.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let mass = self.total_mass();
        compensated_sum(self.iter().map(|(k, w)| (k as f64 - mean).powi(2) * w)) / mass
    }

    /// The law of `X + c`.
    pub fn shifted(&self, c: i64) -> Self {
        Self { offset: self.offset + c, ..self.clone() }
    }

    /// The law of `X + Y` for independent `X` and `Y`.
    pub fn convolve(&self, other: &LatticePmf) -> Self {
        let mut out = vec![0.0; self.len() + other.len() - 1];
        for (i, &a) in self.weights.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.weights.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let d = self.tail_deficit + other.tail_deficit - self.tail_deficit * other.tail_deficit;
        Self { offset: self.offset + other.offset, weights: out, tail_deficit: d }
    }

    /// `(k, mass)` pairs over the stored run.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(i, &w)| (self.offset + i as i64, w))
    }
}

/// A real-weighted measure on a contiguous integer run.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedLatticeMeasure {
    offset: i64,
    weights: Vec<f64>,
}

impl SignedLatticeMeasure {
    pub fn new(offset: i64, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(CouponError::InvalidParams("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(CouponError::InvalidParams(format!("weight {w} is not finite")));
        }
        Ok(Self { offset, weights })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn last(&self) -> i64 {
        self.offset + self.weights.len() as i64 - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, k: i64) -> f64 {
        if k < self.offset {
            return 0.0;
        }
        self.weights.get((k - self.offset) as usize).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    /// Fourier–Stieltjes transform `sum_k nu{k} e^{itk}`.
    pub fn characteristic_function(&self, t: f64) -> Complex64 {
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for (i, &w) in self.weights.iter().enumerate() {
            let (s, c) = (t * (self.offset + i as i64) as f64).sin_cos();
            re.add(w * c);
            im.add(w * s);
        }
        Complex64::new(re.value(), im.value())
    }
}

impl From<&LatticePmf> for SignedLatticeMeasure {
    fn from(p: &LatticePmf) -> Self {
        Self { offset: p.offset, weights: p.weights.clone() }
    }
}
