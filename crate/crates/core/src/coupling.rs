//! Monte Carlo couplings of a lattice walk with its unit shift.
//!
//! Every trial owns its own ChaCha8 stream (`seed`, stream = trial index),
//! so results are bit-reproducible for a given seed and independent of the
//! thread count, and growing `trials` never reshuffles earlier trials.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{embedding_coupling_bound, mineka_uniform_bound, uniform_coupling_bound};
use crate::error::{CouponError, Result};
use crate::exact::exact_pmf_convolution;
use crate::lattice::LatticePmf;
use crate::metrics::d_tv_shift;
use crate::params::CollectorParams;

/// Convolution baselines are skipped beyond this many summed atoms.
const EXACT_ATOM_LIMIT: usize = 20_000;
/// Largest `n` for which the waiting-time estimate also runs the exact engine.
const EXACT_WAITING_TIME_MAX_N: u64 = 400;
const GEOMETRIC_TAIL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: u64,
}

impl SimConfig {
    pub const DEFAULT_TRIALS: u64 = 100_000;

    pub fn new(seed: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(CouponError::InvalidParams("trials must be positive".into()));
        }
        Ok(Self { seed, trials })
    }
}

/// Summand laws a simulation can be driven by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepLaw {
    /// `r` iid uniforms on `1..=2l`.
    Uniform { l: u64, r: u64 },
    /// The geometric summands of the waiting time, success `k/n`, `k = m+1..n`.
    Geometric(CollectorParams),
}

impl StepLaw {
    pub fn step_pmfs(&self) -> Result<Vec<LatticePmf>> {
        match *self {
            StepLaw::Uniform { l, r } => {
                if l == 0 || r == 0 {
                    return Err(CouponError::InvalidParams("l and r must be positive".into()));
                }
                let u = LatticePmf::uniform(1, 2 * l as i64)?;
                Ok(vec![u; r as usize])
            }
            StepLaw::Geometric(params) => (params.m() + 1..=params.n())
                .map(|k| geometric_pmf(k as f64 / params.n() as f64))
                .collect(),
        }
    }
}

/// Geometric law on `1, 2, ...` with success probability `p`, cut where the
/// remaining tail drops below `1e-15`.
pub fn geometric_pmf(p: f64) -> Result<LatticePmf> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(CouponError::InvalidParams(format!("success probability {p} outside (0, 1]")));
    }
    let mut weights = Vec::new();
    let mut tail = 1.0;
    while tail > GEOMETRIC_TAIL {
        weights.push(tail * p);
        tail *= 1.0 - p;
    }
    LatticePmf::new(1, weights, tail)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Estimated probability that the coupled walks have not met by the end.
    pub p_t_gt_r: f64,
    pub std_err: f64,
    pub trials: u64,
    /// Exact `d_TV(W, W + 1)` when a convolution baseline was feasible.
    pub exact_d_tv: Option<f64>,
    /// The closed-form bound the coupling is meant to certify.
    pub bound: Option<f64>,
    /// Observed frequency of the reflected branch, where one exists.
    pub branch_rate: Option<f64>,
    /// Chi-square p-values of simulated marginals against their exact laws.
    pub fidelity_p_values: Vec<f64>,
}

impl SimResult {
    /// `exact <= estimate + 3 se <= bound + 3 se`, skipping absent links.
    pub fn dominance_chain_holds(&self) -> bool {
        let top = self.p_t_gt_r + 3.0 * self.std_err;
        let lower = self.exact_d_tv.is_none_or(|d| d <= top + 1e-12);
        let upper = self.bound.is_none_or(|b| self.p_t_gt_r <= b + 3.0 * self.std_err);
        lower && upper
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Inverse-CDF sampler over a finite list of outcomes.
#[derive(Debug, Clone)]
struct Table<T> {
    outcomes: Vec<T>,
    cumulative: Vec<f64>,
}

impl<T: Copy> Table<T> {
    fn new(items: impl IntoIterator<Item = (T, f64)>) -> Self {
        let mut outcomes = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (x, w) in items {
            if w > 0.0 {
                acc += w;
                outcomes.push(x);
                cumulative.push(acc);
            }
        }
        Self { outcomes, cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> T {
        let total = *self.cumulative.last().expect("non-empty table");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.outcomes[i.min(self.outcomes.len() - 1)]
    }
}

fn marginal_table(p: &LatticePmf) -> Table<i64> {
    Table::new(p.iter())
}

/// The Mineka step-pair law: mass `min(p_{i-1}, p_i)/2` on each of
/// `(i-1, i)` and `(i, i-1)`, the remainder of `p_i` on the diagonal.
fn mineka_table(p: &LatticePmf) -> Table<(i64, i64)> {
    let half_min = |i: i64| 0.5 * p.get(i - 1).min(p.get(i));
    let mut items = Vec::new();
    for i in p.offset()..=p.last() {
        let w = half_min(i);
        items.push(((i - 1, i), w));
        items.push(((i, i - 1), w));
        items.push(((i, i), p.get(i) - w - half_min(i + 1)));
    }
    Table::new(items)
}

#[derive(Debug, Default)]
struct Tally {
    failures: u64,
    branches: u64,
    shifted: u64,
    hist: [BTreeMap<i64, u64>; 2],
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.failures += other.failures;
        self.branches += other.branches;
        self.shifted += other.shifted;
        for (mine, theirs) in self.hist.iter_mut().zip(other.hist) {
            for (k, c) in theirs {
                *mine.entry(k).or_insert(0) += c;
            }
        }
        self
    }

    fn record(&mut self, slot: usize, value: i64) {
        *self.hist[slot].entry(value).or_insert(0) += 1;
    }
}

fn run_trials<F>(config: SimConfig, trial: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) + Sync,
{
    (0..config.trials)
        .into_par_iter()
        .fold(Tally::default, |mut tally, t| {
            let mut rng = trial_rng(config.seed, t);
            trial(&mut rng, &mut tally);
            tally
        })
        .reduce(Tally::default, Tally::merge)
}

fn proportion(successes: u64, trials: u64) -> (f64, f64) {
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

fn convolve_all(pmfs: &[LatticePmf]) -> Option<LatticePmf> {
    let atoms: usize = pmfs.iter().map(LatticePmf::len).sum();
    if pmfs.is_empty() || atoms > EXACT_ATOM_LIMIT {
        return None;
    }
    let mut acc = pmfs[0].clone();
    for p in &pmfs[1..] {
        acc = acc.convolve(p);
    }
    Some(acc)
}

/// Pearson chi-square p-value of observed counts against `expected`.
///
/// Atoms with expected count below 5 are pooled into one cell together with
/// any observation outside the support.
pub fn chi_square_p_value(counts: &BTreeMap<i64, u64>, expected: &LatticePmf) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 1.0;
    }
    let n = total as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut pooled_expected = 0.0;
    let mut pooled_observed = 0u64;
    for (k, p) in expected.iter() {
        let e = n * p;
        let o = counts.get(&k).copied().unwrap_or(0);
        if e >= 5.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            pooled_expected += e;
            pooled_observed += o;
        }
    }
    pooled_observed += counts
        .iter()
        .filter(|(k, _)| **k < expected.offset() || **k > expected.last())
        .map(|(_, c)| c)
        .sum::<u64>();
    pooled_expected += n * expected.tail_deficit();
    if pooled_expected >= 1e-12 {
        stat += (pooled_observed as f64 - pooled_expected).powi(2) / pooled_expected;
        cells += 1;
    } else if pooled_observed > 0 {
        return 0.0;
    }
    if cells < 2 || stat <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur((cells - 1) as f64 / 2.0, stat / 2.0)
}

/// Runs walks `W'` from 0 and `W''` from 1 under the Mineka step-pair law
/// and estimates `P(T > r)`, `r = step_pmfs.len()`, where `T` is the first
/// meeting time. After meeting both walks take identical steps.
pub fn simulate_mineka(step_pmfs: &[LatticePmf], config: SimConfig) -> SimResult {
    let joint: Vec<_> = step_pmfs.iter().map(mineka_table).collect();
    let single: Vec<_> = step_pmfs.iter().map(marginal_table).collect();
    let tally = run_trials(config, |rng, tally| {
        let (mut a, mut b) = (0i64, 1i64);
        let mut met = false;
        for (pair, one) in joint.iter().zip(&single) {
            if met {
                let x = one.sample(rng);
                a += x;
                b += x;
            } else {
                let (x, y) = pair.sample(rng);
                a += x;
                b += y;
                met = a == b;
            }
        }
        if !met {
            tally.failures += 1;
        }
        tally.record(0, a);
        tally.record(1, b - 1);
    });
    let (p, se) = proportion(tally.failures, config.trials);
    let exact = convolve_all(step_pmfs);
    let uniform_bound = uniform_step_size(step_pmfs).map(|_| mineka_uniform_bound(step_pmfs.len() as u64));
    SimResult {
        p_t_gt_r: p,
        std_err: se,
        trials: config.trials,
        exact_d_tv: exact.as_ref().map(|w| d_tv_shift(w).value),
        bound: uniform_bound,
        branch_rate: None,
        fidelity_p_values: exact
            .map(|w| tally.hist.iter().map(|h| chi_square_p_value(h, &w)).collect())
            .unwrap_or_default(),
    }
}

/// `Some(L)` when every step is uniform on the same `1..=L` with `L >= 2`.
fn uniform_step_size(step_pmfs: &[LatticePmf]) -> Option<usize> {
    let first = step_pmfs.first()?;
    let len = first.len();
    let flat = |p: &LatticePmf| {
        p.offset() == 1 && p.len() == len && p.weights().iter().all(|w| (w * len as f64 - 1.0).abs() < 1e-12)
    };
    (len >= 2 && step_pmfs.iter().all(flat)).then_some(len)
}

/// One run of the uniform-lemma coupling for `r` uniforms on `1..=2l`.
/// Returns `(met, V_r, V''_r, took_reflected_branch)`.
fn uniform_lemma_trial(l: u64, r: u64, rng: &mut impl Rng) -> (bool, i64, i64, bool) {
    let two_l = 2 * l;
    let u1 = rng.random_range(1..=two_l);
    if u1 < two_l {
        let mut v = u1 as i64;
        for _ in 1..r {
            v += rng.random_range(1..=two_l) as i64;
        }
        return (true, v, v + 1, false);
    }
    let l = l as i64;
    let (mut v, mut w) = (2 * l, 1i64);
    let mut gap = 2 * l;
    let mut met = false;
    for _ in 1..r {
        let base = rng.random_range(1..=l);
        let up = rng.random_bool(0.5) as i64;
        let u = base + l * up;
        v += u;
        if met {
            w += u;
        } else {
            let u_prime = base + l * (1 - up);
            w += u_prime;
            gap += u - u_prime;
            met = gap == 0;
        }
    }
    (met, v, w, true)
}

/// The reflected-walk coupling of `V_r` and `V_r + 1` for `r` iid uniforms
/// on `1..=2l`; estimates `P(T > r)`.
pub fn simulate_uniform_embedding(l: u64, r: u64, config: SimConfig) -> Result<SimResult> {
    if l == 0 {
        return Err(CouponError::InvalidParams("l must be at least 1".into()));
    }
    if r < 2 {
        return Err(CouponError::InvalidParams(format!("r = {r} must be at least 2")));
    }
    let tally = run_trials(config, |rng, tally| {
        let (met, v, w, branch) = uniform_lemma_trial(l, r, rng);
        tally.failures += u64::from(!met);
        tally.branches += u64::from(branch);
        tally.record(0, v);
        tally.record(1, w);
    });
    let (p, se) = proportion(tally.failures, config.trials);
    let exact = convolve_all(&StepLaw::Uniform { l, r }.step_pmfs()?);
    Ok(SimResult {
        p_t_gt_r: p,
        std_err: se,
        trials: config.trials,
        exact_d_tv: exact.as_ref().map(|v| d_tv_shift(v).value),
        bound: Some(uniform_coupling_bound(l, r)),
        branch_rate: Some(tally.branches as f64 / config.trials as f64),
        fidelity_p_values: exact
            .map(|v| tally.hist.iter().map(|h| chi_square_p_value(h, &v)).collect())
            .unwrap_or_default(),
    })
}

/// Block length and uniform weight used to embed uniforms on `1..=l` in the
/// geometric summands `X_{m+1}, ..., X_{2m}`: `l = floor(n/m)` rounded down
/// to even, `p = (1 - 2m/n)^l m/n`.
pub fn embedding_parameters(params: CollectorParams) -> Result<(u64, f64)> {
    let (n, m) = (params.n(), params.m());
    if m < 2 || 2 * m > n {
        return Err(CouponError::Precondition(format!(
            "embedding path needs 2 <= m <= n/2, got {params}"
        )));
    }
    let q = n / m;
    let l = if q % 2 == 0 { q } else { q - 1 };
    let ratio = m as f64 / n as f64;
    Ok((l, (1.0 - 2.0 * ratio).powi(l as i32) * ratio))
}

/// `X = I U + (1 - I) R` for a geometric summand with success `s`.
#[derive(Debug, Clone)]
struct Decomposition {
    l: u64,
    weight: f64,
    residual: Table<i64>,
}

impl Decomposition {
    fn new(success: f64, l: u64, p: f64) -> Result<(Self, LatticePmf)> {
        let geo = geometric_pmf(success)?;
        let weight = l as f64 * p;
        let residual = Table::new(geo.iter().map(|(k, w)| {
            let mass = if k <= l as i64 { w - p } else { w };
            (k, mass.max(0.0) / (1.0 - weight))
        }));
        Ok((Self { l, weight, residual }, geo))
    }

    fn sample(&self, rng: &mut impl Rng) -> i64 {
        if rng.random_bool(self.weight) {
            rng.random_range(1..=self.l) as i64
        } else {
            self.residual.sample(rng)
        }
    }
}

/// Upper estimate of `d_TV(W, W + 1)` through the uniform embedding.
///
/// Per trial, the indicators `I_j` of `X_{m+1}, ..., X_{2m-1}` are drawn and
/// counted into `T`. If `T < max(2, E T / 2)` the trial scores
/// `d = d_TV(X_{2m}, X_{2m} + 1) = 2m/n`; otherwise the uniform-lemma
/// coupling runs on `T` uniforms and the trial scores 1 when the walks fail
/// to meet. The mean dominates `d_TV(W, W + 1)` by the conditioning argument.
/// `p_t_gt_r` holds the mean and `std_err` its standard error.
pub fn estimate_d_tv_shift_for_waiting_time(params: CollectorParams, config: SimConfig) -> Result<SimResult> {
    let (l, p) = embedding_parameters(params)?;
    let (n, m) = (params.n(), params.m());
    let d = 2.0 * m as f64 / n as f64;
    let weight = l as f64 * p;
    let mean_t = (m - 1) as f64 * weight;
    let (decomposition, target) = Decomposition::new((m + 1) as f64 / n as f64, l, p)?;
    let tally = run_trials(config, |rng, tally| {
        let t = (0..m - 1).filter(|_| rng.random_bool(weight)).count() as u64;
        if t < 2 || (t as f64) < mean_t / 2.0 {
            tally.shifted += 1;
        } else if !uniform_lemma_trial(l / 2, t, rng).0 {
            tally.failures += 1;
        }
        tally.record(0, decomposition.sample(rng));
    });
    let trials = config.trials as f64;
    let (fails, shifted) = (tally.failures as f64, tally.shifted as f64);
    let mean = (fails + d * shifted) / trials;
    let second = (fails + d * d * shifted) / trials;
    let std_err = ((second - mean * mean).max(0.0) / trials).sqrt();
    let bound = if p > 0.0 {
        embedding_coupling_bound(m, l, p, d)?
    } else {
        f64::INFINITY
    };
    let exact_d_tv = if n <= EXACT_WAITING_TIME_MAX_N {
        Some(d_tv_shift(&exact_pmf_convolution(params, 1e-12)?).value)
    } else {
        None
    };
    Ok(SimResult {
        p_t_gt_r: mean,
        std_err,
        trials: config.trials,
        exact_d_tv,
        bound: Some(bound),
        branch_rate: None,
        fidelity_p_values: vec![chi_square_p_value(&tally.hist[0], &target)],
    })
}
