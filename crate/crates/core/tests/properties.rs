use coupon_core::exact::exact_pmf_convolution;
use coupon_core::lattice::LatticePmf;
use coupon_core::metrics::{d_k_lattice, d_tv_lattice, d_tv_shift};
use coupon_core::params::CollectorParams;
use proptest::prelude::*;

fn lattice_law() -> impl Strategy<Value = LatticePmf> {
    (-20i64..20, prop::collection::vec(0.0f64..1.0, 1..30)).prop_filter_map("positive mass", |(offset, raw)| {
        let total: f64 = raw.iter().sum();
        (total > 1e-3).then(|| LatticePmf::new(offset, raw.iter().map(|w| w / total).collect(), 0.0).ok())?
    })
}

proptest! {
    #[test]
    fn kolmogorov_below_total_variation(p in lattice_law(), q in lattice_law()) {
        prop_assert!(d_k_lattice(&p, &q).value <= d_tv_lattice(&p, &q).value + 1e-12);
    }

    #[test]
    fn total_variation_triangle(p in lattice_law(), q in lattice_law(), r in lattice_law()) {
        let pq = d_tv_lattice(&p, &q).value;
        let qr = d_tv_lattice(&q, &r).value;
        let pr = d_tv_lattice(&p, &r).value;
        prop_assert!(pr <= pq + qr + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
    }

    #[test]
    fn distances_are_translation_invariant(p in lattice_law(), q in lattice_law(), c in -50i64..50) {
        let a = d_tv_lattice(&p, &q).value;
        let b = d_tv_lattice(&p.shifted(c), &q.shifted(c)).value;
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((d_tv_shift(&p).value - d_tv_shift(&p.shifted(c)).value).abs() < 1e-12);
    }

    #[test]
    fn waiting_time_law_has_unit_mass(n in 2u64..80, frac in 0.0f64..1.0) {
        let m = ((n - 1) as f64 * frac) as u64;
        let law = exact_pmf_convolution(CollectorParams::new(n, m).unwrap(), 1e-12).unwrap();
        prop_assert!((law.total_mass() + law.tail_deficit() - 1.0).abs() < 1e-12);
        prop_assert!(law.tail_deficit() <= 1e-12);
        prop_assert_eq!(law.offset(), (n - m) as i64);
    }
}
