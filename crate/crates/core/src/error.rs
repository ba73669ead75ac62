//! Error types shared across the kernel.

use thiserror::Error;

/// Errors raised by the algebraic layers.
///
/// Everything here is a *typed* refusal: the operation is undefined in the
/// underlying structure (not a numeric failure), and callers are expected to
/// match on the variant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    /// Product of a Heaviside-bearing factor with a Dirac term at the same
    /// variable. Any Leibniz-compatible extension collapses the Diracs
    /// (differentiating `H^2 = H` forces `delta = 2 H delta` and hence
    /// `delta = 0`), so the product is refused rather than defined.
    #[error("product of distributions is undefined: {0}")]
    ForbiddenProduct(String),

    /// Applying an operator with derivative terms to a piecewise element.
    /// The strong Rota-Baxter axiom fails on the piecewise extension, so the
    /// integration-by-parts rewrite behind `I*f*D` is unsound there.
    #[error("operator with derivative terms cannot act on piecewise elements: {0}")]
    DerivativeOnPiecewise(String),

    /// Boundary problem whose evaluation matrix is singular.
    #[error("singular evaluation matrix (rank defect {rank_defect}): no Green's operator exists")]
    SingularProblem { rank_defect: usize },

    /// Malformed boundary problem (non-monic operator, wrong fundamental
    /// system, non-constant Wronskian, ...).
    #[error("invalid boundary problem: {0}")]
    InvalidProblem(String),

    /// Interval endpoints out of order or not containing the required points.
    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    /// Shifting a diagonal generator would leave the carrier module.
    #[error("shift operators are not defined on diagonal distributions")]
    ShiftOnDiagonal,

    /// An element left the supported basis of the bivariate module (for
    /// example an x-side Heaviside coefficient on a diagonal Dirac).
    #[error("element outside the supported bivariate basis: {0}")]
    UnsupportedBasis(String),

    /// Operator normalization exceeded its rewrite budget.
    #[error("operator normalization exceeded the rewrite budget ({0} steps)")]
    RewriteBudget(usize),

    /// Applying a Green's operator of an ill-posed problem to a piecewise
    /// forcing term: the kernel has Dirac terms and the required
    /// Dirac-times-Heaviside products are undefined.
    #[error("ill-posed problem cannot take piecewise forcing: {0}")]
    IllPosedPiecewiseForcing(String),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;
