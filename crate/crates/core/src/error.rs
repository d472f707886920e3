use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("derivative order {0} is not supported (expected 1..=4)")]
    UnsupportedOrder(u32),

    #[error("field has mean {0:e}; its primitive is not periodic")]
    NonzeroMean(f64),

    #[error("{model}: blow-up at t = {time}, max |field| = {norm}")]
    BlowUp {
        model: &'static str,
        time: f64,
        norm: f64,
    },

    #[error("{model}: total depth degenerate (min 1 + eps*surface = {min_depth})")]
    DepthViolation { model: &'static str, min_depth: f64 },

    #[error("elliptic solver did not converge: {iterations} iterations, residual {residual:e}")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("{what} is not localized: boundary magnitude {edge:e} exceeds {limit:e}")]
    NotLocalized {
        what: String,
        edge: f64,
        limit: f64,
    },

    #[error("states are at different times ({0} vs {1})")]
    TimeMismatch(f64, f64),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("rate fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),

    #[error("rate fit needs positive values, got {0}")]
    NonPositiveValue(f64),

    #[error("rate fit abscissae have no spread")]
    DegenerateSpread,

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid time step: {0}")]
    InvalidStep(String),
}
