use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmError {
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected a {expected}-component field, got {got}")]
    Components { expected: usize, got: usize },
    #[error("field has a nonzero mean coefficient ({0:e})")]
    NonZeroMean(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {index} outside the representable range [{min}, {max}]")]
    OutOfRange { index: i32, min: i32, max: i32 },
    #[error("time step {dt:e} violates the advective CFL limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("non-finite values detected at t = {time}")]
    NonFinite { time: f64 },
    #[error("time series is empty")]
    EmptySeries,
    #[error("missing snapshots: {0}")]
    MissingSnapshots(String),
    #[error("quadrature did not converge: refinement difference {diff:e} above tolerance {tol:e}")]
    Quadrature { diff: f64, tol: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EmError>;
