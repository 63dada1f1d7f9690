use crate::error::{CouponError, Result};
use crate::numeric::{harmonic, NeumaierSum};
use crate::params::CollectorParams;
use crate::quadrature::{integrate, left_window_edge};
use crate::special::scaled_upper_gamma_run;

use super::gumbel::GumbelLike;

/// Below this `e_m(x)` every term is below `1e-100` and treated as zero.
const Y_MIN: f64 = 1e-100;
/// Above this `e_m(x)` the factor `e^{-e_m}` underflows.
const Y_MAX: f64 = 800.0;

/// The first-order correction `G_{n,m}` to the Gumbel-like limit of
/// `(W - mu_n) / n`.
///
/// With `y = e_m(x)`, each smoothed second derivative has the closed form
/// `[f'' * h_k](x) = (k/m!) e^{-y} sum_l c_l y^l Phi(l - k, y)` over
/// `l = m+1, m+2, m+3`, where `Phi` is the scaled upper incomplete gamma
/// function. Integrating by parts then gives
/// `G = -(1/2n) [f'(x) (H_{n-1} - H_m) - sum_k [f'' * h_k](x) / k^2]`.
#[derive(Debug, Clone)]
pub struct CorrectionG {
    params: CollectorParams,
    quad_tol: f64,
    gumbel: GumbelLike,
    harmonic_gap: f64,
}

impl CorrectionG {
    pub fn new(params: CollectorParams, quad_tol: f64) -> Result<Self> {
        if params.n() < params.m() + 2 {
            return Err(CouponError::Precondition(format!(
                "correction needs n >= m + 2, got {params}"
            )));
        }
        if !(1e-14..=1e-6).contains(&quad_tol) {
            return Err(CouponError::InvalidParams(format!(
                "quad_tol = {quad_tol:e} must lie in [1e-14, 1e-6]"
            )));
        }
        let gumbel = GumbelLike::new(params.m());
        let harmonic_gap = harmonic(params.n() - 1) - harmonic(params.m());
        Ok(Self { params, quad_tol, gumbel, harmonic_gap })
    }

    pub fn params(&self) -> CollectorParams {
        self.params
    }

    pub fn gumbel(&self) -> &GumbelLike {
        &self.gumbel
    }

    /// `[f_m'' * h_k](x)` for `k = m+1..=n-1`, in that order.
    pub fn smoothed_second_derivatives(&self, x: f64) -> Vec<f64> {
        let m = self.params.m() as i64;
        let n = self.params.n() as i64;
        let count = (n - 1 - m) as usize;
        let y = self.gumbel.e_m(x);
        if !(Y_MIN..=Y_MAX).contains(&y) {
            return vec![0.0; count];
        }
        let ln_y = -(x + self.gumbel.c_m());
        let ln_m_fact = crate::numeric::ln_factorial(m as u64);
        let m1 = (m + 1) as f64;
        // (l, c_l, e^{-y} y^l / m!)
        let terms = [
            (m + 1, m1 * m1),
            (m + 2, -(2.0 * m1 + 1.0)),
            (m + 3, 1.0),
        ]
        .map(|(l, c)| (l, c * (-y + l as f64 * ln_y - ln_m_fact).exp()));
        let s_min = m + 2 - n;
        let phi = scaled_upper_gamma_run(s_min, 2, y);
        (m + 1..n)
            .map(|k| {
                let mut acc = NeumaierSum::new();
                for &(l, w) in &terms {
                    acc.add(w * phi[(l - k - s_min) as usize]);
                }
                k as f64 * acc.value()
            })
            .collect()
    }

    /// `G_{n,m}(x)`.
    pub fn value(&self, x: f64) -> f64 {
        let smoothed = self.smoothed_second_derivatives(x);
        let m = self.params.m();
        let mut acc = NeumaierSum::new();
        acc.add(self.gumbel.pdf_derivative(x) * self.harmonic_gap);
        for (i, s) in smoothed.iter().enumerate() {
            let k = (m + 1 + i as u64) as f64;
            acc.add(-s / (k * k));
        }
        -acc.value() / (2.0 * self.params.n() as f64)
    }

    /// `G'_{n,m}(x) = -(1/2n) sum_k [f_m'' * h_k](x) / k`.
    pub fn derivative(&self, x: f64) -> f64 {
        let smoothed = self.smoothed_second_derivatives(x);
        let m = self.params.m();
        let acc: NeumaierSum = smoothed
            .iter()
            .enumerate()
            .map(|(i, s)| s / (m + 1 + i as u64) as f64)
            .collect();
        -acc.value() / (2.0 * self.params.n() as f64)
    }

    /// `G_{n,m}(x)` by adaptive quadrature of the derivative over the window
    /// where it exceeds `1e-16`, to absolute tolerance `quad_tol`.
    pub fn value_by_quadrature(&self, x: f64) -> Result<f64> {
        let lo = left_window_edge(|u| self.derivative(u), self.gumbel.center(), 1e-16);
        if x <= lo {
            return Ok(0.0);
        }
        Ok(integrate(|u| self.derivative(u), lo, x, self.quad_tol, 0.0)?.value)
    }

    /// `[f_m'' * h_k](x) = k int_{-inf}^{x} e^{-k(x-v)} f_m''(v) dv` by direct
    /// quadrature; an independent check on the closed form.
    pub fn smoothed_second_derivative_by_quadrature(&self, k: u64, x: f64) -> Result<f64> {
        let g = self.gumbel;
        let kf = k as f64;
        let integrand = move |v: f64| kf * (-kf * (x - v)).exp() * g.pdf_second_derivative(v);
        let lo = left_window_edge(|v| g.pdf_second_derivative(v), g.center().min(x), 1e-300);
        if x <= lo {
            return Ok(0.0);
        }
        Ok(integrate(integrand, lo, x, self.quad_tol, 0.0)?.value)
    }
}
