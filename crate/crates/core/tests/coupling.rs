use coupon_core::coupling::{
    estimate_d_tv_shift_for_waiting_time, simulate_mineka, simulate_uniform_embedding, SimConfig, StepLaw,
};
use coupon_core::lattice::LatticePmf;
use coupon_core::params::CollectorParams;

fn config(seed: u64) -> SimConfig {
    SimConfig::new(seed, SimConfig::DEFAULT_TRIALS).unwrap()
}

/// Law of the lazy walk `S` started at -1 with steps +-1 w.p. 1/4, 0 w.p. 1/2,
/// returned as `P(S_r = -1) + P(S_r = -2)`, which by reflection equals the
/// probability that `S` stays below 0 for `r` steps.
fn lazy_walk_survival(r: usize) -> f64 {
    let mut dist = vec![0.0; 2 * r + 3];
    let origin = r + 1;
    dist[origin - 1] = 1.0;
    for _ in 0..r {
        let mut next = vec![0.0; dist.len()];
        for (i, &w) in dist.iter().enumerate().filter(|(_, w)| **w > 0.0) {
            next[i - 1] += 0.25 * w;
            next[i] += 0.5 * w;
            next[i + 1] += 0.25 * w;
        }
        dist = next;
    }
    dist[origin - 1] + dist[origin - 2]
}

#[test]
fn mineka_uniform_pair_matches_lazy_walk() {
    let steps = StepLaw::Uniform { l: 1, r: 50 }.step_pmfs().unwrap();
    let res = simulate_mineka(&steps, config(11));
    let survival = lazy_walk_survival(50);
    assert!((res.p_t_gt_r - survival).abs() <= 3.0 * res.std_err, "{res:?} vs {survival}");
    assert!(res.exact_d_tv.unwrap() <= res.p_t_gt_r + 3.0 * res.std_err);
    assert!(res.fidelity_p_values.iter().all(|&p| p > 1e-4), "{res:?}");
}

#[test]
fn one_over_root_two_r_is_too_small_for_two_point_uniforms() {
    // V_r - r is Bin(r, 1/2), so d_TV(V_r, V_r + 1) is its modal mass,
    // roughly sqrt(2 / (pi r)), which exceeds 1 / sqrt(2r).
    let steps = StepLaw::Uniform { l: 1, r: 50 }.step_pmfs().unwrap();
    let res = simulate_mineka(&steps, SimConfig::new(1, 100).unwrap());
    assert!(res.exact_d_tv.unwrap() > res.bound.unwrap());
    assert!(lazy_walk_survival(50) > res.bound.unwrap());
}

#[test]
fn mineka_point_masses_never_meet() {
    let steps = vec![LatticePmf::point_mass(3); 10];
    let res = simulate_mineka(&steps, SimConfig::new(1, 1000).unwrap());
    assert_eq!(res.p_t_gt_r, 1.0);
    assert_eq!(res.exact_d_tv, Some(1.0));
}

#[test]
fn mineka_geometric_steps_dominate_exact() {
    let params = CollectorParams::new(30, 20).unwrap();
    let steps = StepLaw::Geometric(params).step_pmfs().unwrap();
    let res = simulate_mineka(&steps, config(5));
    let exact = res.exact_d_tv.unwrap();
    assert!(exact <= res.p_t_gt_r + 3.0 * res.std_err, "{res:?}");
    assert!(res.fidelity_p_values.iter().all(|&p| p > 1e-4), "{res:?}");
}

#[test]
fn uniform_lemma_example() {
    let res = simulate_uniform_embedding(2, 16, config(7)).unwrap();
    assert!(res.p_t_gt_r <= 0.125 + 3.0 * res.std_err, "{res:?}");
    let branch = res.branch_rate.unwrap();
    let se = (0.25f64 * 0.75 / res.trials as f64).sqrt();
    assert!((branch - 0.25).abs() <= 3.0 * se, "{branch}");
    assert!(res.dominance_chain_holds(), "{res:?}");
    assert!(res.fidelity_p_values.iter().all(|&p| p > 1e-4), "{res:?}");
}

#[test]
fn uniform_lemma_rejects_short_walks() {
    assert!(simulate_uniform_embedding(2, 1, config(0)).is_err());
    assert!(simulate_uniform_embedding(0, 5, config(0)).is_err());
    assert!(simulate_uniform_embedding(1, 2, config(0)).is_ok());
}

#[test]
fn identical_seeds_are_bit_identical() {
    let a = simulate_uniform_embedding(3, 20, SimConfig::new(42, 5000).unwrap()).unwrap();
    let b = simulate_uniform_embedding(3, 20, SimConfig::new(42, 5000).unwrap()).unwrap();
    assert_eq!(a.p_t_gt_r.to_bits(), b.p_t_gt_r.to_bits());
    assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
    assert_eq!(a, b);
    let c = simulate_uniform_embedding(3, 20, SimConfig::new(43, 5000).unwrap()).unwrap();
    assert_ne!(a.p_t_gt_r, c.p_t_gt_r);
}

#[test]
fn waiting_time_embedding_chain() {
    let params = CollectorParams::new(200, 50).unwrap();
    let res = estimate_d_tv_shift_for_waiting_time(params, config(3)).unwrap();
    let exact = res.exact_d_tv.unwrap();
    assert!(exact <= res.bound.unwrap(), "{res:?}");
    assert!(res.dominance_chain_holds(), "{res:?}");
    assert!(res.fidelity_p_values[0] > 1e-4, "{res:?}");
}

#[test]
fn waiting_time_embedding_regime() {
    let est = |n, m| estimate_d_tv_shift_for_waiting_time(CollectorParams::new(n, m).unwrap(), SimConfig::new(1, 2000).unwrap());
    assert!(est(100, 50).is_ok());
    assert!(est(100, 51).is_err());
    assert!(est(100, 1).is_err());
}

#[test]
fn exact_shift_distance_scales_with_sigma() {
    let mut scaled = Vec::new();
    for n in [100u64, 200, 400, 800, 1600, 3200] {
        let params = CollectorParams::new(n, n / 4).unwrap();
        let pmf = coupon_core::exact::exact_pmf_convolution(params, 1e-12).unwrap();
        let sigma = coupon_core::moments::moments(params, 2).unwrap().sigma_n();
        scaled.push(coupon_core::metrics::d_tv_shift(&pmf).value * sigma);
    }
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi / lo < 1.5, "{scaled:?}");
}
