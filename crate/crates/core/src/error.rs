//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by sketching, estimation, recovery, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a precondition (non-positive scale, empty input, ...).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An input left the mathematical domain of an operation (zero signal,
    /// non-PSD matrix, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The Gaussian block of a sketch is identically zero, so no sparsity
    /// or rank ratio can be formed.
    #[error("degenerate sketch: the squared-measurement estimate is zero")]
    DegenerateSketch,

    /// The confidence-interval hypothesis eta_n < 1 (resp. zeta_n < 1) fails.
    #[error("confidence interval hypothesis violated: {param} = {value:.6} yields {bound_name} = {bound:.6} >= 1 (n = {n})")]
    HypothesisViolation {
        param: &'static str,
        value: f64,
        bound_name: &'static str,
        bound: f64,
        n: usize,
    },

    /// `ceil(s_hat) >= p`, so the budget formula's logarithm is not positive;
    /// callers should fall back to n = p.
    #[error("measurement budget undefined: ceil(s_hat) = {s_ceil} >= p = {p}; use n = p")]
    BudgetUndefined { s_ceil: usize, p: usize },

    /// The matrix has no null space (full column rank).
    #[error("no null space: matrix has full column rank {rank}")]
    NoNullSpace { rank: usize },

    /// The adversarial construction did not reach the target bound.
    #[error("construction failed after {retries} retries: best attained s = {best_s:.6} < bound {bound:.6}")]
    RetriesExhausted {
        retries: usize,
        best_s: f64,
        bound: f64,
    },

    /// Equality-constrained basis pursuit with measurements outside the
    /// operator's range.
    #[error("basis pursuit infeasible: eps0 = 0 but the least-squares residual is {residual:.3e}")]
    Infeasible { residual: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file did not match its documented format.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(reason: impl Into<String>) -> Self {
        Error::Domain(reason.into())
    }
}
