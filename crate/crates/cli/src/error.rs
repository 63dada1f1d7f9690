use coupon_core::error::CouponError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),
    #[error(transparent)]
    Core(#[from] CouponError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for bad arguments or unwritable outputs, 2 for violated
    /// preconditions, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                CouponError::InvalidParams(_) => 1,
                CouponError::Precondition(_) | CouponError::RegimeBoundary(_) => 2,
                CouponError::Infeasible { .. }
                | CouponError::NonConvergence { .. }
                | CouponError::MassMismatch { .. }
                | CouponError::NonPositiveRate(_) => 3,
            },
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
