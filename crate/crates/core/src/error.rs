use thiserror::Error;

/// Errors raised by the coupon collector engines and approximations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouponError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("enumeration too large: {size} terms exceeds limit {limit}")]
    Infeasible { size: f64, limit: f64 },
    #[error("quadrature did not converge: estimated error {error:e} after {intervals} intervals")]
    NonConvergence { error: f64, intervals: usize },
    #[error("total mass {mass} differs from 1 by more than {tol:e}")]
    MassMismatch { mass: f64, tol: f64 },
    #[error("non-positive compound Poisson rate: mu = {0}")]
    NonPositiveRate(f64),
    #[error("regime boundary: a_n2 = {0} is too close to 1")]
    RegimeBoundary(f64),
}

pub type Result<T> = std::result::Result<T, CouponError>;
