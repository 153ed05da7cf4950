//! Shared error type for the solver library.

/// Everything that can go wrong inside the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("axis length mismatch: expected {expected}, got {got}")]
    LaneLength { expected: usize, got: usize },

    #[error("field shape mismatch: expected {expected:?} nodes, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite sample {value} at node ({i},{k}) = ({x}, {y})")]
    NonFiniteSample {
        i: usize,
        k: usize,
        x: f64,
        y: f64,
        value: f64,
    },

    #[error("newton: derivative {derivative:e} too close to zero at x = {at:e}")]
    DegenerateDerivative { at: f64, derivative: f64 },

    #[error("newton: residual became non-finite at x = {at:e}")]
    NonFiniteResidual { at: f64 },

    #[error(
        "newton did not converge: {iterations} iterations, residual {residual:e}, last iterate {last:e}"
    )]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        last: f64,
    },

    #[error("multiplier {value:e} outside safeguard bound {bound:e}")]
    MultiplierOutOfRange { value: f64, bound: f64 },

    #[error("unknown benchmark case `{0}`")]
    UnknownCase(String),

    #[error("case `{0}` has no exact solution; convergence study not supported")]
    UnsupportedCase(String),

    #[error("time step failed at step {step} (t = {time}): {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("snapshot parse: {0}")]
    SnapshotParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
