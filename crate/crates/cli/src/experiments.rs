//! Row producers for each subcommand.

use clap::ValueEnum;
use serde::Serialize;

use coupon_core::approx::{
    build_poisson_charlier, corrected_poisson_pmf, cp_parameters, CorrectionG, GumbelLike, StandardNormal,
};
use coupon_core::bounds::{
    cp_regime_order, normal_bound, pc_bound_orders, poisson_limit_bound, poisson_lower_bound,
    poisson_upper_bound, stein_mean_bound, structural_checks, BoundKind, BoundReport, CpRegime,
};
use coupon_core::coupling::{
    estimate_d_tv_shift_for_waiting_time, simulate_mineka, simulate_uniform_embedding, SimConfig, SimResult,
    StepLaw,
};
use coupon_core::error::{CouponError, Result};
use coupon_core::exact::{exact_pmf_convolution, exact_pmf_markov};
use coupon_core::lattice::LatticePmf;
use coupon_core::metrics::{d_k_lattice_vs_continuous, d_tv_lattice, d_tv_signed, AffineMap};
use coupon_core::moments::moments;
use coupon_core::numeric::harmonic;
use coupon_core::params::CollectorParams;
use coupon_core::special::poisson_pmf_vec;

use crate::output::Row;

const TAIL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Target {
    /// Kolmogorov distance of the standardised law to N(0, 1).
    Normal,
    /// Kolmogorov distance of `W/n - (H_n - H_m)` to the Gumbel-like limit.
    Gumbel,
    /// As `gumbel`, against the limit plus its 1/n correction.
    GumbelCorrected,
    /// `d_TV(W - (n-m), Po(lambda_n))`.
    Poisson,
    /// `d_TV(W - (n-m), Po(lambda'_n))` with matched means.
    PoissonMean,
    /// Largest pointwise error of the two-term Poisson expansion.
    CorrectedPoisson,
    /// `d_TV(W + c, pi_{mu,a})`.
    CompoundPoisson,
    /// Total variation and local error of the Poisson–Charlier measure.
    PoissonCharlier,
    /// Simulated upper estimate of `d_TV(W, W + 1)` by uniform embedding.
    Embedding,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Normal => "normal",
            Target::Gumbel => "gumbel",
            Target::GumbelCorrected => "gumbel_corrected",
            Target::Poisson => "poisson",
            Target::PoissonMean => "poisson_mean",
            Target::CorrectedPoisson => "corrected_poisson",
            Target::CompoundPoisson => "compound_poisson",
            Target::PoissonCharlier => "poisson_charlier",
            Target::Embedding => "embedding",
        }
    }
}

fn kind_str(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::Explicit => "explicit",
        BoundKind::Order => "order",
    }
}

fn with_report(row: Row, report: &BoundReport) -> Row {
    row.bounded(report.bound_value, kind_str(report.kind), report.preconditions_met, &report.reasons)
}

fn base(p: CollectorParams, target: &str, metric: &str, value: f64) -> Row {
    Row::new(Some(p.n()), Some(p.m()), target, p.regime().as_str(), metric, value)
}

fn shifted_law(p: CollectorParams) -> Result<LatticePmf> {
    Ok(exact_pmf_convolution(p, TAIL_EPS)?.shifted(-(p.target() as i64)))
}

fn poisson_law(lambda: f64, at_least: i64) -> Result<LatticePmf> {
    if lambda == 0.0 {
        return Ok(LatticePmf::point_mass(0));
    }
    let k_max = (at_least as f64).max(lambda + 40.0 * lambda.sqrt() + 40.0) as u64;
    LatticePmf::from_truncated(0, poisson_pmf_vec(lambda, k_max))
}

pub fn moment_rows(p: CollectorParams, j_max: usize) -> Result<Vec<Row>> {
    let s = moments(p, j_max)?;
    let mut rows = vec![
        base(p, "moments", "mu_n", s.mu_n),
        base(p, "moments", "sigma2_n", s.sigma2_n),
        base(p, "moments", "lambda_n", s.lambda_n),
        base(p, "moments", "lambda_prime_n", s.lambda_prime_n),
    ];
    for j in 1..=j_max {
        rows.push(base(p, "moments", "a_nj", s.a_nj(j)).at(j as i64));
        rows.push(base(p, "moments", "lambda_nj", s.lambda_nj(j)).at(j as i64));
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Engine {
    Convolution,
    Markov,
}

pub fn pmf_rows(p: CollectorParams, engine: Engine, t_max: Option<u64>) -> Result<Vec<Row>> {
    let law = match engine {
        Engine::Convolution => exact_pmf_convolution(p, TAIL_EPS)?,
        Engine::Markov => {
            let s = moments(p, 2)?;
            let default = (s.mu_n + 12.0 * s.sigma_n()).ceil() as u64;
            exact_pmf_markov(p, t_max.unwrap_or(default).max(p.target()))?
        }
    };
    let last = t_max.map_or(law.last(), |t| law.last().min(t as i64));
    Ok((law.offset()..=last).map(|t| base(p, "pmf", "pmf", law.get(t)).at(t)).collect())
}

pub fn distance_rows(p: CollectorParams, target: Target, order: usize, sim: SimConfig) -> Result<Vec<Row>> {
    let n = p.n() as f64;
    let name = target.as_str();
    match target {
        Target::Normal => {
            let s = moments(p, 2)?;
            if s.sigma2_n == 0.0 {
                return Err(CouponError::Precondition(format!("{p}: the law is a point mass")));
            }
            let law = exact_pmf_convolution(p, TAIL_EPS)?;
            let d = d_k_lattice_vs_continuous(&law, AffineMap::standardize(s.mu_n, s.sigma_n())?, &StandardNormal);
            Ok(vec![with_report(base(p, name, "d_k", d.value), &normal_bound(p))])
        }
        Target::Gumbel | Target::GumbelCorrected => {
            let law = exact_pmf_convolution(p, TAIL_EPS)?;
            let map = AffineMap::new(1.0 / n, -(harmonic(p.n()) - harmonic(p.m())))?;
            let limit = GumbelLike::new(p.m());
            let d = if target == Target::Gumbel {
                d_k_lattice_vs_continuous(&law, map, &limit)
            } else {
                let g = CorrectionG::new(p, 1e-10)?;
                d_k_lattice_vs_continuous(&law, map, &|x: f64| limit.cdf(x) + g.value(x))
            };
            Ok(vec![base(p, name, "d_k", d.value)])
        }
        Target::Poisson | Target::PoissonMean => {
            let law = shifted_law(p)?;
            let s = moments(p, 3)?;
            let (lambda, report) = if target == Target::Poisson {
                (s.lambda_n, poisson_upper_bound(p))
            } else {
                (s.lambda_prime_n, stein_mean_bound(p))
            };
            let d = d_tv_lattice(&law, &poisson_law(lambda, law.last())?);
            Ok(vec![with_report(base(p, name, "d_tv", d.value), &report)])
        }
        Target::CorrectedPoisson => {
            let law = shifted_law(p)?;
            let mut worst = (0.0, 0);
            for k in 0..=law.last() {
                let e = (law.get(k) - corrected_poisson_pmf(p, k as u64)?).abs();
                if e > worst.0 {
                    worst = (e, k);
                }
            }
            Ok(vec![base(p, name, "sup_local", worst.0).at(worst.1)])
        }
        Target::CompoundPoisson => {
            let cp = cp_parameters(p)?;
            let law = exact_pmf_convolution(p, TAIL_EPS)?.shifted(cp.c);
            let approx = cp.pmf(law.last().max(0) as u64 + 200)?;
            let d = d_tv_lattice(&law, &approx);
            let report = cp_regime_order(p);
            let mut row = with_report(base(p, name, "d_tv", d.value), &report);
            row.regime = report.label.unwrap_or(CpRegime::Medium.as_str()).to_string();
            Ok(vec![row])
        }
        Target::PoissonCharlier => {
            let (measure, nu) = build_poisson_charlier(p, order, 40)?;
            let law = shifted_law(p)?.shifted(measure.c);
            let d = d_tv_signed(&law, &nu)?;
            let (lo, hi) = (law.offset().min(nu.offset()), law.last().max(nu.last()));
            let sup = (lo..=hi).map(|k| (law.get(k) - nu.get(k)).abs()).fold(0.0, f64::max);
            let orders = pc_bound_orders(p, order)?;
            let regime = measure.regime.as_str();
            let mut tv = with_report(base(p, name, "d_tv", d.value), &orders.total_variation);
            let mut local = with_report(base(p, name, "sup_local", sup), &orders.local);
            tv.regime = regime.to_string();
            local.regime = regime.to_string();
            Ok(vec![tv, local])
        }
        Target::Embedding => {
            let res = estimate_d_tv_shift_for_waiting_time(p, sim)?;
            Ok(sim_rows(Some(p), "embedding", &res))
        }
    }
}

pub fn bound_rows(p: CollectorParams, order: usize) -> Result<Vec<Row>> {
    let s = moments(p, 2)?;
    let mut reports = vec![
        normal_bound(p),
        poisson_upper_bound(p),
        poisson_lower_bound(p),
        poisson_limit_bound(p, s.lambda_n),
        stein_mean_bound(p),
        cp_regime_order(p),
    ];
    if let Ok(orders) = pc_bound_orders(p, order) {
        reports.push(orders.local);
        reports.push(orders.total_variation);
    }
    let mut rows: Vec<Row> = reports
        .iter()
        .map(|r| {
            let mut row = base(p, "bounds", r.theorem_id.as_str(), r.bound_value);
            row.bound_kind = kind_str(r.kind).to_string();
            row.preconditions_met = r.preconditions_met;
            row.reasons = r.reasons.join("; ");
            row
        })
        .collect();
    let structural = structural_checks(p, order);
    for check in &structural.checks {
        let mut row = base(p, "structural", &check.name, check.lhs);
        row.bound = Some(check.rhs);
        row.bound_kind = "explicit".into();
        row.preconditions_met = check.applicable;
        if !check.applicable {
            row.reasons = "outside the range of m where the inequality is stated".into();
        }
        rows.push(row);
    }
    rows.push(base(p, "structural", "t0", structural.t0));
    Ok(rows)
}

fn sim_rows(p: Option<CollectorParams>, label: &str, res: &SimResult) -> Vec<Row> {
    let (n, m) = (p.map(|p| p.n()), p.map(|p| p.m()));
    let regime = p.map_or("", |p| p.regime().as_str());
    let row = |metric: &str, value: f64| Row::new(n, m, label, regime, metric, value);
    let mut main = row("p_t_gt_r", res.p_t_gt_r);
    if let Some(b) = res.bound {
        main = main.bounded(b, "explicit", true, &[]);
    }
    let mut rows = vec![main, row("std_err", res.std_err), row("trials", res.trials as f64)];
    if let Some(d) = res.exact_d_tv {
        rows.push(row("exact_d_tv", d));
    }
    if let Some(b) = res.branch_rate {
        rows.push(row("branch_rate", b));
    }
    for (i, p) in res.fidelity_p_values.iter().enumerate() {
        rows.push(row("fidelity_p_value", *p).at(i as i64));
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Lemma {
    /// Reflected-walk coupling for uniforms on `1..=2l`.
    Uniform,
    /// Mineka coupling, with uniform steps or the waiting time's geometrics.
    Mineka,
    /// Uniform embedding in the waiting time's geometric summands.
    Embedding,
}

pub fn couple_rows(
    lemma: Lemma,
    l: Option<u64>,
    r: Option<u64>,
    params: Option<CollectorParams>,
    sim: SimConfig,
) -> Result<Vec<Row>> {
    let need = |v: Option<u64>, flag: &str| {
        v.ok_or_else(|| CouponError::InvalidParams(format!("--{flag} is required for this lemma")))
    };
    match lemma {
        Lemma::Uniform => {
            let res = simulate_uniform_embedding(need(l, "l")?, need(r, "r")?, sim)?;
            Ok(sim_rows(None, "uniform_lemma", &res))
        }
        Lemma::Mineka => {
            let law = match params {
                Some(p) => StepLaw::Geometric(p),
                None => StepLaw::Uniform { l: need(l, "l")?, r: need(r, "r")? },
            };
            let res = simulate_mineka(&law.step_pmfs()?, sim);
            Ok(sim_rows(params, "mineka", &res))
        }
        Lemma::Embedding => {
            let p = params.ok_or_else(|| CouponError::InvalidParams("--n and --m are required".into()))?;
            let res = estimate_d_tv_shift_for_waiting_time(p, sim)?;
            Ok(sim_rows(Some(p), "embedding", &res))
        }
    }
}

/// How `m` is derived from `n` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum MRule {
    Fixed(u64),
    Ratio(f64),
    Poisson(f64),
    Offset(u64),
}

impl std::str::FromStr for MRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, value) = s
            .split_once(':')
            .ok_or_else(|| format!("m rule `{s}` must look like fixed:M, ratio:R, poisson:L or offset:C"))?;
        let int = || value.parse::<u64>().map_err(|e| format!("m rule `{s}`: {e}"));
        let real = || value.parse::<f64>().map_err(|e| format!("m rule `{s}`: {e}"));
        match name {
            "fixed" => Ok(MRule::Fixed(int()?)),
            "ratio" => Ok(MRule::Ratio(real()?)),
            "poisson" => Ok(MRule::Poisson(real()?)),
            "offset" => Ok(MRule::Offset(int()?)),
            other => Err(format!("unknown m rule `{other}`")),
        }
    }
}

impl MRule {
    /// `fixed`: m; `ratio`: floor(rho n); `poisson`: n - ceil(sqrt(2 lambda n));
    /// `offset`: n - c.
    pub fn apply(&self, n: u64) -> Result<CollectorParams> {
        let nf = n as f64;
        let m = match *self {
            MRule::Fixed(m) => Some(m),
            MRule::Ratio(rho) if (0.0..1.0).contains(&rho) => Some((rho * nf).floor() as u64),
            MRule::Poisson(lambda) if lambda > 0.0 => n.checked_sub((2.0 * lambda * nf).sqrt().ceil() as u64),
            MRule::Offset(c) => n.checked_sub(c),
            _ => None,
        };
        let m = m.ok_or_else(|| CouponError::InvalidParams(format!("{self:?} gives no valid m for n = {n}")))?;
        CollectorParams::new(n, m)
    }
}
