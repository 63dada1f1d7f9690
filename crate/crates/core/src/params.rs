use std::fmt;

use crate::error::{CouponError, Result};

/// The experiment: draw uniformly with replacement from `n` coupons until
/// all but `m` of them have been seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CollectorParams {
    n: u64,
    m: u64,
}

impl CollectorParams {
    /// Requires `n >= 2` and `m <= n - 1`.
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if n < 2 {
            return Err(CouponError::InvalidParams(format!("n = {n} must be at least 2")));
        }
        if m >= n {
            return Err(CouponError::InvalidParams(format!(
                "m = {m} must be at most n - 1 = {}",
                n - 1
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Number of distinct coupons to collect, `n - m`.
    pub fn target(&self) -> u64 {
        self.n - self.m
    }

    pub fn regime(&self) -> LimitRegime {
        LimitRegime::classify(self.n, self.m)
    }
}

impl fmt::Display for CollectorParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, m={})", self.n, self.m)
    }
}

/// Which of the four classical limit laws governs `W` at this `(n, m)`.
///
/// The limits are asymptotic, so finite inputs are labelled by fixed cutoffs
/// on `r = (n - m) / sqrt(n)`: below 0.2 the shifted waiting time is almost
/// surely zero, up to 4 it is Poisson-like, and beyond that `m <= 10` is
/// treated as the Gumbel-like case and everything else as normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitRegime {
    Degenerate,
    Poisson,
    Normal,
    GumbelLike,
}

impl LimitRegime {
    pub const DEGENERATE_CUTOFF: f64 = 0.2;
    pub const POISSON_CUTOFF: f64 = 4.0;
    pub const GUMBEL_MAX_M: u64 = 10;

    pub fn classify(n: u64, m: u64) -> Self {
        let r = (n - m) as f64 / (n as f64).sqrt();
        if r < Self::DEGENERATE_CUTOFF {
            LimitRegime::Degenerate
        } else if r <= Self::POISSON_CUTOFF {
            LimitRegime::Poisson
        } else if m <= Self::GUMBEL_MAX_M {
            LimitRegime::GumbelLike
        } else {
            LimitRegime::Normal
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            LimitRegime::Degenerate => "degenerate",
            LimitRegime::Poisson => "poisson",
            LimitRegime::Normal => "normal",
            LimitRegime::GumbelLike => "gumbel",
        }
    }
}

impl fmt::Display for LimitRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_pairs() {
        assert!(CollectorParams::new(1, 0).is_err());
        assert!(CollectorParams::new(5, 5).is_err());
        assert!(CollectorParams::new(2, 1).is_ok());
    }

    #[test]
    fn regime_labels() {
        assert_eq!(LimitRegime::classify(10_000, 9_999), LimitRegime::Degenerate);
        assert_eq!(LimitRegime::classify(10_000, 9_900), LimitRegime::Poisson);
        assert_eq!(LimitRegime::classify(10_000, 3), LimitRegime::GumbelLike);
        assert_eq!(LimitRegime::classify(10_000, 5_000), LimitRegime::Normal);
    }
}
