use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not physical: {0}")]
    NonPhysicalState(String),

    #[error("divergence constraint violated: residual {residual:.3e} exceeds {tolerance:.3e}")]
    ConstraintViolation { residual: f64, tolerance: f64 },

    #[error("elliptic solve failed to converge: relative residual {residual:.3e} after {iters} iterations")]
    EllipticSolve { residual: f64, iters: usize },

    #[error("blow-up detected at t = {time:.6}: field `{field}` max-norm {value:.3e}")]
    BlowUp {
        time: f64,
        field: String,
        value: f64,
    },

    #[error("configuration error:\n{}", errors.join("\n"))]
    Config { errors: Vec<String> },

    #[error("unknown experiment `{name}`; available: {available}")]
    UnknownExperiment { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(errors: Vec<String>) -> Self {
        Error::Config { errors }
    }
}
