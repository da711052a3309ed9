use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate measure: discretized mass is zero")]
    DegenerateMeasure,

    #[error("grid mismatch: expected {expected} points, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("singular cost: grid point {0} lies on the domain boundary")]
    SingularCost(usize),

    #[error("marginal mismatch: total masses {0} and {1} differ")]
    MarginalMismatch(f64, f64),

    #[error("oracle limit: support sizes {m}x{n} exceed 16 cells")]
    OracleLimit { m: usize, n: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("semi-distance axiom violated at pair ({0}, {1})")]
    AxiomViolation(usize, usize),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("empty level set at r = {0}")]
    EmptyLevel(f64),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::GridMismatch { expected, got })
    }
}
