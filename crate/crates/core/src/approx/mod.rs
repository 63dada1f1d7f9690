//! Approximating laws for the waiting time.

pub mod charlier;
pub mod compound;
pub mod correction;
pub mod gumbel;
pub mod polynomial;
pub mod poisson;

pub use charlier::{
    build_poisson_charlier, charlier_classical, charlier_classical_run, charlier_polynomial,
    CharlierForm, ChiRegime, PoissonCharlierMeasure, SignForm,
};
pub use compound::{compound_poisson_pmf, cp_parameters, CompoundPoissonDist};
pub use correction::CorrectionG;
pub use gumbel::{gumbel_cdf, gumbel_pdf_second_derivative, star_argument, star_shift, GumbelLike};
pub use poisson::{corrected_poisson_pmf, StandardNormal};

/// A distribution function on the real line.
pub trait ContinuousCdf {
    fn cdf(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> ContinuousCdf for F {
    fn cdf(&self, x: f64) -> f64 {
        self(x)
    }
}
