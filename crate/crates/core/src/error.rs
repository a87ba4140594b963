use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a function (ψ, Γ, a generator, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two independent routes to the same quantity disagree.
    #[error("inconsistency: {what}: closed form {closed} vs numerical {numerical}")]
    Inconsistency {
        what: String,
        closed: f64,
        numerical: f64,
    },

    #[error("path extension limit of {limit} chunks exceeded (reached log-mass {reached}, wanted {target})")]
    ExtensionLimit {
        limit: usize,
        reached: f64,
        target: f64,
    },

    #[error("importance resampling degenerate: effective sample size {ess:.1} below floor {floor:.1}")]
    Resampling { ess: f64, floor: f64 },

    #[error("numerical differentiation unstable: {0}")]
    Precision(String),

    /// A numerical sweep found a point where a claimed inequality fails.
    #[error("verification failed at x = {x}: value {value} exceeds bound {bound}")]
    Verification { x: f64, value: f64, bound: f64 },

    #[error("cannot parse family spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}
