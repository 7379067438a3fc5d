use thiserror::Error;

#[derive(Debug, Error)]
pub enum DcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error(
        "subproblem residual {residual:e} exceeds {bound:e} (the subproblem oracle does not solve ∇g(y) = u)"
    )]
    SubproblemResidual { residual: f64, bound: f64 },

    #[error(
        "descent violated at iteration {iteration}: φ(y) = {phi_y} > φ(x) − ρ‖d‖² + slack = {bound}"
    )]
    DescentViolation {
        iteration: usize,
        phi_y: f64,
        bound: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ambiguous classification: references {first} and {second} are both within tolerance")]
    AmbiguousClassification { first: String, second: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
