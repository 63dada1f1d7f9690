//! Explicit error bounds and order terms as functions of `(n, m)`.

use std::fmt;

use crate::error::{CouponError, Result};
use crate::metrics::DistanceResult;
use crate::moments::{moments, MomentSummary};
use crate::params::CollectorParams;

/// Identifies the inequality a report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    NormalKolmogorov,
    PoissonUpper,
    PoissonLower,
    PoissonLimit,
    PoissonMeanMatched,
    CompoundPoissonOrder,
    PoissonCharlierLocal,
    PoissonCharlierTotalVariation,
}

impl TheoremId {
    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::NormalKolmogorov => "normal_kolmogorov",
            TheoremId::PoissonUpper => "poisson_upper",
            TheoremId::PoissonLower => "poisson_lower",
            TheoremId::PoissonLimit => "poisson_limit",
            TheoremId::PoissonMeanMatched => "poisson_mean_matched",
            TheoremId::CompoundPoissonOrder => "compound_poisson_order",
            TheoremId::PoissonCharlierLocal => "poisson_charlier_local",
            TheoremId::PoissonCharlierTotalVariation => "poisson_charlier_tv",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether `bound_value` carries an explicit constant or only a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Explicit,
    Order,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub theorem_id: TheoremId,
    pub kind: BoundKind,
    pub bound_value: f64,
    pub preconditions_met: bool,
    pub reasons: Vec<String>,
    pub measured: Option<f64>,
    pub slack: f64,
    pub label: Option<&'static str>,
}

impl BoundReport {
    fn new(theorem_id: TheoremId, kind: BoundKind, bound_value: f64) -> Self {
        Self {
            theorem_id,
            kind,
            bound_value,
            preconditions_met: true,
            reasons: Vec::new(),
            measured: None,
            slack: 0.0,
            label: None,
        }
    }

    fn require(mut self, ok: bool, reason: impl Into<String>) -> Self {
        if !ok {
            self.preconditions_met = false;
            self.reasons.push(reason.into());
        }
        self
    }

    pub fn with_measured(mut self, d: &DistanceResult) -> Self {
        self.measured = Some(d.value);
        self.slack = d.truncation_slack;
        self
    }

    /// `Some(measured <= bound + slack)` for explicit bounds whose
    /// preconditions hold; `None` otherwise.
    pub fn holds(&self) -> Option<bool> {
        match (self.kind, self.preconditions_met, self.measured) {
            (BoundKind::Explicit, true, Some(d)) => Some(d <= self.bound_value + self.slack),
            _ => None,
        }
    }

    /// `measured / bound_value`, when measured.
    pub fn ratio(&self) -> Option<f64> {
        self.measured.map(|d| d / self.bound_value)
    }
}

pub const NORMAL_CONSTANT: f64 = 9.257;

/// `C (n/m) / sigma_n` with `C = 9.257` for the Kolmogorov distance of the
/// standardised waiting time to the standard normal law.
pub fn normal_bound(params: CollectorParams) -> BoundReport {
    let s = summary(params);
    let (n, m) = (params.n(), params.m());
    let sigma = s.sigma_n();
    let value = if m == 0 || sigma == 0.0 {
        f64::INFINITY
    } else {
        NORMAL_CONSTANT * n as f64 / (m as f64 * sigma)
    };
    BoundReport::new(TheoremId::NormalKolmogorov, BoundKind::Explicit, value)
        .require(n >= 3, "needs n >= 3")
        .require(m >= 1, "needs m >= 1")
        .require(m + 2 <= n, "needs m <= n - 2; the law is degenerate")
}

/// `2 sum_{i=m+1}^{n} (1 - i/n)^2`.
pub fn poisson_upper_bound(params: CollectorParams) -> BoundReport {
    let s = summary(params);
    BoundReport::new(TheoremId::PoissonUpper, BoundKind::Explicit, 2.0 * s.lambda_nj(2))
}

/// `(1/5) (prod_{i=m+1}^{n} i/n) sum (1 - i/n)^2`, valid when every
/// success probability is at least 3/4.
pub fn poisson_lower_bound(params: CollectorParams) -> BoundReport {
    let s = summary(params);
    let (n, m) = (params.n(), params.m());
    let ln_prod: f64 = (m + 1..=n).map(|i| (i as f64 / n as f64).ln()).sum();
    let value = 0.2 * ln_prod.exp() * s.lambda_nj(2);
    BoundReport::new(TheoremId::PoissonLower, BoundKind::Explicit, value)
        .require(4 * (m + 1) >= 3 * n, "needs (m + 1)/n >= 3/4")
}

/// Upper bound for `d_TV(W - (n-m), Po(lambda))` with an arbitrary mean.
pub fn poisson_limit_bound(params: CollectorParams, lambda: f64) -> BoundReport {
    let s = summary(params);
    let value = 2.0 * s.lambda_nj(2) + (s.lambda_n - lambda).abs();
    BoundReport::new(TheoremId::PoissonLimit, BoundKind::Explicit, value)
        .require(lambda >= 0.0, "needs lambda >= 0")
}

/// `8 min(1, sqrt(2/(e lambda'))) a_{n,3}` against `Po(lambda')` with
/// `lambda' = E[W - (n-m)]`.
pub fn stein_mean_bound(params: CollectorParams) -> BoundReport {
    let s = summary(params);
    let lp = s.lambda_prime_n;
    if lp == 0.0 {
        return BoundReport::new(TheoremId::PoissonMeanMatched, BoundKind::Explicit, 0.0)
            .require(false, "degenerate: lambda' = 0, both laws are the point mass at 0");
    }
    let factor = (2.0 / (std::f64::consts::E * lp)).sqrt().min(1.0);
    BoundReport::new(TheoremId::PoissonMeanMatched, BoundKind::Explicit, 8.0 * factor * s.a_nj(3))
}

/// `1 / (l sqrt(r))` for `d_TV(V_r, V_r + 1)`, `V_r` a sum of `r` uniforms
/// on `1..=2l`.
pub fn uniform_coupling_bound(l: u64, r: u64) -> f64 {
    1.0 / (l as f64 * (r as f64).sqrt())
}

/// `1 / sqrt(2r)` for the meeting-time tail of the lazy-walk coupling of
/// uniforms on `{1, 2}`.
pub fn mineka_uniform_bound(r: u64) -> f64 {
    1.0 / (2.0 * r as f64).sqrt()
}

/// `4 / (l sqrt(n l p)) + 8 d_n / (n l p)` for `n` summands each of which
/// dominates `p` times the uniform law on `1..=l`.
pub fn embedding_coupling_bound(n: u64, l: u64, p: f64, d_n: f64) -> Result<f64> {
    if l < 2 || l % 2 != 0 {
        return Err(CouponError::InvalidParams(format!("l = {l} must be even and at least 2")));
    }
    if !(p > 0.0 && p <= 1.0 / l as f64) {
        return Err(CouponError::InvalidParams(format!("p = {p} must lie in (0, 1/l]")));
    }
    if !(0.0..=1.0).contains(&d_n) {
        return Err(CouponError::InvalidParams(format!("d_n = {d_n} must lie in [0, 1]")));
    }
    if n == 0 {
        return Err(CouponError::InvalidParams("n must be positive".into()));
    }
    let nlp = n as f64 * l as f64 * p;
    Ok(4.0 / (l as f64 * nlp.sqrt()) + 8.0 * d_n / nlp)
}

/// The four compound Poisson regimes, split at fixed cutoffs in `m/n` and,
/// near `m = n`, by whether `floor(a_{n,2}) >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpRegime {
    Small,
    Medium,
    Large,
    VeryLarge,
}

impl CpRegime {
    pub const SMALL_CUTOFF: f64 = 0.1;
    pub const LARGE_CUTOFF: f64 = 0.9;

    pub fn classify(params: CollectorParams, a_n2: f64) -> Self {
        let ratio = params.m() as f64 / params.n() as f64;
        if ratio <= Self::SMALL_CUTOFF {
            CpRegime::Small
        } else if ratio < Self::LARGE_CUTOFF {
            CpRegime::Medium
        } else if a_n2.floor() >= 1.0 {
            CpRegime::Large
        } else {
            CpRegime::VeryLarge
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CpRegime::Small => "small",
            CpRegime::Medium => "medium",
            CpRegime::Large => "large",
            CpRegime::VeryLarge => "very_large",
        }
    }
}

/// `(1/sigma_n) (floor(a_{n,2}) / sigma_n^2 + (n-m)^2 / (n m))`, the rate of
/// the compound Poisson approximation to `W + c`.
pub fn cp_regime_order(params: CollectorParams) -> BoundReport {
    let s = summary(params);
    let (n, m) = (params.n() as f64, params.m() as f64);
    let a2 = s.a_nj(2);
    let sigma = s.sigma_n();
    let value = if sigma == 0.0 || m == 0.0 {
        f64::INFINITY
    } else {
        (a2.floor() / s.sigma2_n + (n - m).powi(2) / (n * m)) / sigma
    };
    let mut report = BoundReport::new(TheoremId::CompoundPoissonOrder, BoundKind::Order, value)
        .require(params.m() >= 2, "needs m >= 2")
        .require(params.m() + 4 <= params.n(), "needs m <= n - 4");
    report.label = Some(CpRegime::classify(params, a2).as_str());
    report
}

/// Order terms of the Poisson–Charlier expansion of order `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcBoundOrders {
    pub local: BoundReport,
    pub total_variation: BoundReport,
    /// Rate of the total variation norm of successive expansion terms.
    pub successive_norm: f64,
}

pub fn pc_bound_orders(params: CollectorParams, r: usize) -> Result<PcBoundOrders> {
    if r < 3 {
        return Err(CouponError::InvalidParams(format!("R = {r} must be at least 3")));
    }
    let s = summary(params);
    let (n, m) = (params.n() as f64, params.m() as f64);
    let rf = r as f64;
    let sigma = s.sigma_n();
    let a2 = s.a_nj(2);
    let sqrt_n = n.sqrt();
    let (local, tv, norm, label) = if a2 > 1.0 {
        if 2.0 * m < n {
            (
                m.powf(-rf / 2.0),
                sigma * sigma.ln() * m.powf(-rf / 2.0),
                m.powf(-(rf - 1.0) / 2.0),
                "a2_large_low_m",
            )
        } else {
            (
                sqrt_n.powf(rf - 2.0) / (n - m).powf(rf - 1.0),
                sqrt_n.powf(rf - 3.0) / (n - m).powf(rf - 2.0),
                sqrt_n.powf(rf - 3.0) / (n - m).powf(rf - 2.0),
                "a2_large_high_m",
            )
        }
    } else {
        (n.powf(-rf / 2.0), (n - m) / sqrt_n.powf(rf + 1.0), (n - m) / sqrt_n.powf(rf + 1.0), "a2_small")
    };
    let mut local = BoundReport::new(TheoremId::PoissonCharlierLocal, BoundKind::Order, local)
        .require(m >= 1.0, "needs m >= 1")
        .require((a2 - 1.0).abs() >= 1e-6, "a_n2 too close to 1");
    local.label = Some(label);
    let mut total_variation = BoundReport::new(TheoremId::PoissonCharlierTotalVariation, BoundKind::Order, tv);
    total_variation.preconditions_met = local.preconditions_met;
    total_variation.reasons = local.reasons.clone();
    total_variation.label = Some(label);
    Ok(PcBoundOrders { local, total_variation, successive_norm: norm })
}

/// One inequality from the structural propositions.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub applicable: bool,
}

impl StructuralCheck {
    /// `lhs <= rhs` up to rounding, or vacuously true when not applicable.
    pub fn holds(&self) -> bool {
        !self.applicable || self.lhs <= self.rhs * (1.0 + 1e-12) + 1e-300
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralReport {
    pub checks: Vec<StructuralCheck>,
    pub t0: f64,
}

impl StructuralReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(StructuralCheck::holds)
    }

    pub fn violations(&self) -> Vec<&StructuralCheck> {
        self.checks.iter().filter(|c| !c.holds()).collect()
    }
}

/// Evaluates the variance, `a_{n,j}` and `lambda_{n,j}` inequalities at
/// `(n, m)` and returns `t_0 = sqrt(pi R ln sqrt(m)) / sigma_n`.
pub fn structural_checks(params: CollectorParams, r: usize) -> StructuralReport {
    let j_max = r.max(6);
    let s = moments(params, j_max).expect("j_max >= 2");
    let (n, m) = (params.n() as f64, params.m() as f64);
    let gap = n - m;
    let mut checks = Vec::new();
    let mut push = |name: String, lhs: f64, rhs: f64, applicable: bool| {
        checks.push(StructuralCheck { name, lhs, rhs, applicable });
    };
    let var_ok = m >= 1.0 && gap >= 2.0;
    let low_m = m <= n / 2.0 - 1.0;
    let high_m = m >= n / 2.0;
    push("sigma2_lower_low_m".into(), n * n / (20.0 * m), s.sigma2_n, var_ok && low_m);
    push("sigma2_upper_low_m".into(), s.sigma2_n, n * n / m, var_ok && low_m);
    push("sigma2_lower_high_m".into(), gap * gap / (24.0 * n), s.sigma2_n, var_ok && high_m);
    push("sigma2_upper_high_m".into(), s.sigma2_n, 2.0 * gap * gap / n, var_ok && high_m);
    let a2 = s.a_nj(2);
    push("a2_lower".into(), (gap - 1.0).powi(3) / (3.0 * n * n), a2, m >= 1.0);
    push("a2_upper".into(), a2, gap.powi(3) / (m * m), m >= 1.0);
    for j in 2..=j_max {
        let jf = j as i32;
        let aj = s.a_nj(j);
        push(
            format!("a{j}_upper_low_m"),
            aj,
            2f64.powi(jf) * n.powi(jf) / m.powi(jf - 1),
            m >= 1.0 && low_m,
        );
        push(
            format!("a{j}_upper_high_m"),
            aj,
            2f64.powi(jf) * gap.powi(jf + 1) / n.powi(jf),
            m >= 1.0 && m >= n / 2.0 - 1.0,
        );
    }
    for j in 2..=6 {
        let bound = s.lambda_n * (2.0 * s.lambda_n / n).powf((j as f64 - 1.0) / 2.0);
        push(format!("lambda{j}_upper"), s.lambda_nj(j), bound, gap >= 2.0);
    }
    let t0 = if m >= 1.0 && s.sigma2_n > 0.0 {
        (std::f64::consts::PI * r as f64 * m.sqrt().ln()).sqrt() / s.sigma_n()
    } else {
        0.0
    };
    StructuralReport { checks, t0 }
}

/// Least-squares fit of `ln error = ln constant + exponent ln n`.
pub fn fit_rate(ns: &[f64], errors: &[f64]) -> Result<(f64, f64)> {
    if ns.len() != errors.len() {
        return Err(CouponError::InvalidParams(format!(
            "{} sizes but {} errors",
            ns.len(),
            errors.len()
        )));
    }
    if ns.len() < 4 {
        return Err(CouponError::InvalidParams("rate fit needs at least 4 points".into()));
    }
    if ns.iter().chain(errors).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(CouponError::InvalidParams("rate fit needs positive finite inputs".into()));
    }
    let xs: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CouponError::InvalidParams("rate fit needs distinct sizes".into()));
    }
    let exponent = sxy / sxx;
    Ok((exponent, (my - exponent * mx).exp()))
}

fn summary(params: CollectorParams) -> MomentSummary {
    moments(params, 3).expect("J = 3 is valid")
}
