use alloc::string::String;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("law has empty support")]
    EmptySupport,
    #[error("value ({a}, {theta}) outside the declared bounds")]
    BoundsViolated { a: f64, theta: f64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("medium window does not cover [{lo}, {hi}]")]
    WindowCoverage { lo: f64, hi: f64 },
    #[error("quadrature did not converge")]
    QuadratureNonConvergence,
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("grid budget exceeded: {needed} nodes requested, budget {budget}")]
    GridBudget { needed: u64, budget: u64 },
    #[error("profile does not live on the problem grid")]
    GridMismatch,
    #[error("stretch [{lo}, {hi}] exits the domain")]
    StretchExitsDomain { lo: f64, hi: f64 },
    #[error("search budget exhausted: {0}")]
    SearchBudgetExhausted(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("alignment violation: {0}")]
    Alignment(String),
    #[error("maximization did not converge")]
    MaximizationNonConvergence,
    #[error("radius ladder exhausted at level j = {0}")]
    LadderExhausted(u32),
    #[error("linear solve did not converge after {0} iterations")]
    LinearSolveNonConvergence(usize),
    #[error("N_max = {0} exceeds the exact arithmetic budget (at most 4)")]
    NmaxTooLarge(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
