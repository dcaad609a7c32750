use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("invalid physical parameters: {0}")]
    InvalidParams(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("requested {requested} eigenpairs, at most {cap} available on this grid")]
    TooManyModes { requested: usize, cap: usize },

    #[error("coefficient field is not strictly positive at node {node} (value {value})")]
    NonPositiveCoefficient { node: usize, value: f64 },

    #[error("inverse iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("symmetric eigensolver did not converge")]
    EigensolverFailure,

    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },

    /// `sup |u|` exceeded the parabolicity margin `m < 1/(2k)`.
    #[error("parabolicity violated at node {node}: |u| = {value} exceeds margin {margin}")]
    ParabolicityViolation {
        node: usize,
        value: f64,
        margin: f64,
    },

    /// `λb − c²` vanishes, so `μ(λ) = λ²/(λb − c²)` is undefined.
    #[error("λ = {re} + {im}i lies on the excluded point λb = c²")]
    SingularMu { re: f64, im: f64 },

    #[error("λ = {re} + {im}i is not in the resolvent set (relative residual {residual:e}, conditioning {conditioning:e})")]
    SingularResolvent {
        re: f64,
        im: f64,
        residual: f64,
        conditioning: f64,
    },

    #[error("degenerate decay fit: {0}")]
    DegenerateFit(&'static str),
}
