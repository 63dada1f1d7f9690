use crate::numeric::{harmonic, ln_factorial};
use crate::special::EULER_GAMMA;

use super::ContinuousCdf;

/// The Gumbel-like limit law with parameter `m`: density
/// `e^{-e_m(x)} e_m(x)^{m+1} / m!` where `e_m(x) = e^{-(x + C_m)}` and
/// `C_m = gamma - H_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelLike {
    m: u64,
    c_m: f64,
    ln_m_factorial: f64,
}

impl GumbelLike {
    pub fn new(m: u64) -> Self {
        Self { m, c_m: EULER_GAMMA - harmonic(m), ln_m_factorial: ln_factorial(m) }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn c_m(&self) -> f64 {
        self.c_m
    }

    pub fn e_m(&self, x: f64) -> f64 {
        (-(x + self.c_m)).exp()
    }

    /// `ln f_m(x)`, finite wherever `e_m(x)` is.
    fn ln_pdf(&self, x: f64) -> f64 {
        let e = self.e_m(x);
        -e - (self.m + 1) as f64 * (x + self.c_m) - self.ln_m_factorial
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if self.e_m(x).is_infinite() {
            return 0.0;
        }
        self.ln_pdf(x).exp()
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        let e = self.e_m(x);
        if e.is_infinite() {
            return 0.0;
        }
        self.pdf(x) * (e - (self.m + 1) as f64)
    }

    pub fn pdf_second_derivative(&self, x: f64) -> f64 {
        let e = self.e_m(x);
        if e.is_infinite() {
            return 0.0;
        }
        let m1 = (self.m + 1) as f64;
        self.pdf(x) * (e * e - (2.0 * m1 + 1.0) * e + m1 * m1)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let e = self.e_m(x);
        if e.is_infinite() {
            return 0.0;
        }
        if e == 0.0 {
            return 1.0;
        }
        let ln_e = -(x + self.c_m);
        let total: f64 = (0..=self.m)
            .map(|j| (-e + j as f64 * ln_e - ln_factorial(j)).exp())
            .sum();
        total.min(1.0)
    }

    /// The unshifted form `F_m(x - C_m)`, whose `e_m` is `e^{-x}`.
    pub fn star_cdf(&self, x: f64) -> f64 {
        self.cdf(x - self.c_m)
    }

    /// The point where `e_m = 1`.
    pub fn center(&self) -> f64 {
        -self.c_m
    }
}

impl ContinuousCdf for GumbelLike {
    fn cdf(&self, x: f64) -> f64 {
        GumbelLike::cdf(self, x)
    }
}

pub fn gumbel_cdf(m: u64, x: f64) -> f64 {
    GumbelLike::new(m).cdf(x)
}

pub fn gumbel_pdf_second_derivative(m: u64, x: f64) -> f64 {
    GumbelLike::new(m).pdf_second_derivative(x)
}

/// `E_n = H_n - ln n - gamma`.
pub fn euler_remainder(n: u64) -> f64 {
    harmonic(n) - (n as f64).ln() - EULER_GAMMA
}

/// `H_n - ln n - gamma + H_m`.
pub fn star_shift(n: u64, m: u64) -> f64 {
    euler_remainder(n) + harmonic(m)
}

/// Maps `x` to the argument at which the unstandardised law is evaluated
/// in the star variant: `F*_{n,m}(x) = F_{n,m}(star_argument(n, m, x))`.
pub fn star_argument(n: u64, m: u64, x: f64) -> f64 {
    x - (harmonic(n) - (n as f64).ln()) + harmonic(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, left_window_edge};

    #[test]
    fn cdf_at_unit_exponent() {
        assert!((gumbel_cdf(0, -EULER_GAMMA) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(gumbel_cdf(3, 800.0), 1.0);
        assert_eq!(gumbel_cdf(3, -800.0), 0.0);
    }

    #[test]
    fn second_derivative_at_unit_exponent() {
        let v = gumbel_pdf_second_derivative(0, -EULER_GAMMA);
        assert!((v + (-1f64).exp()).abs() < 1e-15);
        assert_eq!(gumbel_pdf_second_derivative(2, 900.0), 0.0);
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let h = 1e-4;
        for m in 0..3 {
            let g = GumbelLike::new(m);
            for x in [-1.0, 0.0, 1.0] {
                let fd = (g.pdf(x + h) - 2.0 * g.pdf(x) + g.pdf(x - h)) / (h * h);
                assert!((fd - g.pdf_second_derivative(x)).abs() < 1e-6, "m={m} x={x}");
            }
        }
    }

    #[test]
    fn cdf_matches_quadrature_of_pdf() {
        for m in [0, 1, 2, 5] {
            let g = GumbelLike::new(m);
            let lo = left_window_edge(|x| g.pdf(x), g.center(), 1e-300);
            let mut x = -6.0;
            while x <= 10.0 {
                let q = integrate(|u| g.pdf(u), lo, x, 1e-13, 1e-13).unwrap();
                assert!((q.value - g.cdf(x)).abs() < 1e-9, "m={m} x={x}");
                x += 0.5;
            }
        }
    }

    #[test]
    fn density_and_second_derivative_integrals() {
        for m in [0, 1, 2] {
            let g = GumbelLike::new(m);
            let lo = left_window_edge(|x| g.pdf(x), g.center(), 1e-300);
            let total = integrate(|u| g.pdf(u), lo, 60.0, 1e-13, 1e-13).unwrap();
            assert!((total.value - 1.0).abs() < 1e-10);
            let second = integrate(|u| g.pdf_second_derivative(u), lo, 60.0, 1e-13, 0.0).unwrap();
            assert!(second.value.abs() < 1e-9);
        }
    }

    #[test]
    fn star_shift_values() {
        assert!((star_shift(1, 0) - (1.0 - EULER_GAMMA)).abs() < 1e-15);
        let n = 100_000u64;
        let e = star_shift(n, 0);
        assert!((e - 1.0 / (2.0 * n as f64)).abs() < 1e-10);
    }
}
