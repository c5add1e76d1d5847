use thiserror::Error;

/// Errors raised by grid construction, assembly and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid radial range: r_min = {r_min}, r_max = {r_max} (need 0 < r_min < r_max)")]
    InvalidRange { r_min: f64, r_max: f64 },

    #[error("too few nodes: {n} (need at least {min})")]
    TooFewNodes { n: usize, min: usize },

    #[error("coupling out of range: nu = {nu} (need 0 < nu <= 1)")]
    CouplingOutOfRange { nu: f64 },

    #[error("theorem hypothesis violated: c1 + Gamma - 1 = {lhs} >= sqrt(1 - nu^2) = {bound}")]
    TheoremHypothesisViolated { lhs: f64, bound: f64 },

    #[error("invalid potential metadata: {0}")]
    InvalidPotential(String),

    #[error("potential metadata violated at r = {r}: {what}")]
    PotentialBoundViolated { r: f64, what: &'static str },

    #[error("kappa must be a nonzero integer")]
    ZeroKappa,

    #[error("gamma = {gamma} must exceed sup V = {sup}")]
    GammaBelowSup { gamma: f64, sup: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("resolvent system is singular at this mesh: mu_1 = {mu1:e}")]
    SolverSingular { mu1: f64 },

    #[error("no c in (-1, 1) gives a nonnegative form on this mesh")]
    NoValidC,

    #[error("no eigenvalue in window: mu_{k} stays positive (min mu_{k} = {margin:e})")]
    NoEigenvalue { k: usize, margin: f64 },

    #[error("invalid search window [{lo}, {hi}]: {why}")]
    WindowInvalid { lo: f64, hi: f64, why: &'static str },

    #[error("supercritical channel: nu = {nu} > |kappa| = {kappa}")]
    SupercriticalChannel { nu: f64, kappa: i32 },

    #[error("too few nodes for exponent fit: {0}")]
    InsufficientNodes(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
