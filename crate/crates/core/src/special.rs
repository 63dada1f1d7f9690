//! Special functions: Poisson and normal laws, the exponential integral and
//! the scaled upper incomplete gamma function at integer orders.

use std::f64::consts::PI;

/// Euler's constant to 31 significant digits.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.5772156649015328606065120900824;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[allow(clippy::excessive_precision)]
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.08106146679532725822,
    0.041340695955409294094,
    0.027677925684998339149,
    0.020790672103765093112,
    0.016644691189821192163,
    0.013876128823070747999,
    0.011896709945891770095,
    0.010411265261972096497,
    0.0092554621827127329177,
    0.0083305634333628712565,
    0.007573675487951840795,
    0.0069428401072095298657,
    0.0064089941880042070684,
    0.0059513701127588477356,
    0.005554733551962801371,
];

/// `ln k! - (k ln k - k + ln sqrt(2 pi k))`, the error of Stirling's formula.
fn stirlerr(k: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if k < 16 {
        return STIRLERR_TABLE[k as usize];
    }
    let x = k as f64;
    let xx = x * x;
    if k > 500 {
        (S0 - S1 / xx) / x
    } else if k > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if k > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x / np) + np - x`, evaluated without cancellation
/// when `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Poisson probability `e^{-lambda} lambda^k / k!` by the saddle-point
/// decomposition, accurate to a few ulps even for large `k` and `lambda`.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if k == 0 {
        return (-lambda).exp();
    }
    let x = k as f64;
    (-stirlerr(k) - bd0(x, lambda) - LN_SQRT_2PI - 0.5 * x.ln()).exp()
}

/// Poisson masses for `k = 0..=k_max`.
pub fn poisson_pmf_vec(lambda: f64, k_max: u64) -> Vec<f64> {
    (0..=k_max).map(|k| poisson_pmf(lambda, k)).collect()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `e^y E_1(y)` for `y > 0`.
pub fn scaled_exp_integral(y: f64) -> f64 {
    assert!(y > 0.0, "exponential integral needs a positive argument");
    if y <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= -y / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        (-EULER_GAMMA - y.ln() - sum) * y.exp()
    } else {
        continued_fraction(0, y)
    }
}

/// Lentz evaluation of `y^{-s} e^y Gamma(s, y)` from the Legendre continued
/// fraction; converges quickly when `y >= 1` or `s <= 0` with `y` moderate.
fn continued_fraction(s: i64, y: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let a = s as f64;
    let mut b = y + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `Phi(s, y) = y^{-s} e^{y} Gamma(s, y)` for every integer `s` in
/// `s_min..=s_max`, with `Gamma(s, y)` the upper incomplete gamma function
/// continued to nonpositive orders.
///
/// The recursion `y Phi(s + 1) = s Phi(s) + 1` is run upward for `s > -y` and
/// downward below that, starting from a continued-fraction anchor at
/// `s = -floor(y)`, so that neither direction amplifies rounding error.
pub fn scaled_upper_gamma_run(s_min: i64, s_max: i64, y: f64) -> Vec<f64> {
    assert!(s_min <= s_max, "empty order range");
    assert!(y > 0.0 && y.is_finite(), "argument must be positive and finite");
    let anchor = (-(y.floor() as i64)).max(s_min).min(0);
    let lo = s_min.min(anchor);
    let hi = s_max.max(anchor);
    let mut run = vec![0.0; (hi - lo + 1) as usize];
    let idx = |s: i64| (s - lo) as usize;
    run[idx(anchor)] = if anchor == 0 {
        scaled_exp_integral(y)
    } else {
        continued_fraction(anchor, y)
    };
    for s in anchor..hi {
        run[idx(s + 1)] = (s as f64 * run[idx(s)] + 1.0) / y;
    }
    for s in (lo + 1..=anchor).rev() {
        run[idx(s - 1)] = (y * run[idx(s)] - 1.0) / (s - 1) as f64;
    }
    run[idx(s_min)..=idx(s_max)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn poisson_reference_values() {
        // Reference values from 50-digit arithmetic.
        let cases = [
            (10_000.0, 10_000u64, 0.003_989_389_558_962_825_648_7),
            (3.7, 12, 0.000_339_777_128_446_668_868_86),
            (1_000.0, 950, 0.003_629_619_066_304_595_807_5),
            (0.45, 3, 0.009_683_977_552_755_681_889_6),
            (50.0, 120, 2.169_115_001_592_309_172_8e-17),
        ];
        for (lambda, k, expected) in cases {
            let got = poisson_pmf(lambda, k);
            assert!(rel(got, expected) < 1e-12, "{lambda} {k}: {got} vs {expected}");
        }
    }

    #[test]
    fn poisson_zero_rate_is_point_mass() {
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
        assert_eq!(poisson_pmf(2.5, 0), (-2.5f64).exp());
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.3) + normal_cdf(-1.3) - 1.0).abs() < 1e-15);
        let tail = normal_cdf(-8.0);
        assert!(rel(tail, 6.220_960_574_271_784_1e-16) < 1e-9, "{tail:e}");
    }

    #[test]
    fn scaled_e1_reference_values() {
        let cases = [
            (0.01, 4.078_511_443_456_425_846_6),
            (0.5, 0.922_910_632_483_730_468_83),
            (1.0, 0.596_347_362_323_194_074_34),
            (7.5, 0.119_025_047_208_411_135_19),
            (300.0, 0.003_322_295_565_270_707_064_4),
        ];
        for (y, expected) in cases {
            let got = scaled_exp_integral(y);
            assert!(rel(got, expected) < 1e-13, "{y}: {got} vs {expected}");
        }
    }

    #[test]
    fn scaled_gamma_run_reference_values() {
        // (y, s, y^-s e^y Gamma(s, y)) from 60-digit arithmetic.
        let cases = [
            (0.3, -40, 0.024809198318145809223),
            (0.3, -17, 0.057742185012473563801),
            (0.3, -3, 0.29283192311047069833),
            (0.3, 0, 1.2225356050805855565),
            (0.3, 1, 3.3333333333333333333),
            (0.3, 2, 14.444444444444444444),
            (2.5, -40, 0.023496205758681540787),
            (2.5, -17, 0.050934315355564221997),
            (2.5, -3, 0.16790146748441640839),
            (2.5, 0, 0.30352583648598409918),
            (2.5, 2, 0.56),
            (17.2, -40, 0.017390473123099923088),
            (17.2, -17, 0.028816250745486260063),
            (17.2, -3, 0.04756355632285470663),
            (17.2, 0, 0.055096292359097090461),
            (17.2, 2, 0.061519740400216333153),
            (60.0, -40, 0.0099404775362382087915),
            (60.0, -17, 0.012857820722772402297),
            (60.0, -3, 0.015639843658369269214),
            (60.0, 0, 0.01639771370804652678),
            (60.0, 2, 0.016944444444444444444),
        ];
        for y in [0.3, 2.5, 17.2, 60.0] {
            let run = scaled_upper_gamma_run(-40, 2, y);
            for &(yy, s, expected) in cases.iter().filter(|c| c.0 == y) {
                let got = run[(s + 40) as usize];
                assert!(rel(got, expected) < 1e-13, "y={yy} s={s}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn scaled_gamma_run_subrange() {
        let full = scaled_upper_gamma_run(-10, 2, 4.0);
        let part = scaled_upper_gamma_run(-2, 1, 4.0);
        for (i, v) in part.iter().enumerate() {
            assert!(rel(*v, full[i + 8]) < 1e-14);
        }
    }
}
