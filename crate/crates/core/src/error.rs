use thiserror::Error;

/// Failure of an elementary jet/scalar operation: the evaluation left the
/// regular domain (non-timelike velocity, metric degeneracy, expression
/// singularity). These are surfaced rather than silently continued because
/// downstream curvature formulas would quietly produce garbage otherwise.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("square root of non-positive value {0}")]
    SqrtNonPositive(f64),
    #[error("logarithm of non-positive value {0}")]
    LogNonPositive(f64),
    #[error("division by zero")]
    DivByZero,
    #[error("abs is not differentiable at 0")]
    AbsAtZero,
    #[error("power with non-integer exponent needs a positive base, got {0}")]
    PowNonPositiveBase(f64),
}

/// Errors raised by the tensor pipeline proper.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrError {
    #[error(transparent)]
    Domain(#[from] DomainError),

    #[error("domain error in `{component}` at x = {point:?}: {source}")]
    Eval {
        component: String,
        point: [f64; 4],
        source: DomainError,
    },

    #[error("velocity is not timelike: gtilde(y, y) = {gyy}")]
    NonTimelike { gyy: f64 },

    #[error("Finsler function not positive: L = {l}")]
    NonPositiveFinsler { l: f64 },

    #[error("fundamental tensor is singular: det g = {det}")]
    SingularMetric { det: f64 },

    #[error("metric is degenerate: |eigenvalue| = {eig} < 1e-12")]
    DegenerateMetric { eig: f64 },

    #[error("scenario is not vacuum at this point: max |A| = {a_max}")]
    NotVacuum { a_max: f64 },

    #[error("scenario is not Berwald at this point: max |B_cov| = {b_max}")]
    NotBerwald { b_max: f64 },

    #[error("field tensor is not antisymmetric: max |F + F^T| = {asym}")]
    NonAntisymmetric { asym: f64 },

    #[error("jet direction {dir} out of range (seeded directions: {dirs})")]
    DirectionOutOfRange { dir: usize, dirs: usize },

    #[error("jet configuration out of range: {msg}")]
    JetConfig { msg: String },
}

pub type Result<T> = std::result::Result<T, FrError>;
