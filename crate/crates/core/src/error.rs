use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("eigendecomposition of a {dim}x{dim} matrix did not converge after {iterations} sweeps")]
    EigenConvergence { dim: usize, iterations: usize },

    #[error("branch tracking failed at detuning {eps} µeV: {reason}")]
    Tracking { eps: f64, reason: String },

    #[error(
        "adiabaticity singularity at detuning {eps} µeV: branches {a} and {b} are degenerate but coupled"
    )]
    Singularity { eps: f64, a: usize, b: usize },

    #[error("empty detuning window [{start}, {stop}]")]
    EmptyWindow { start: f64, stop: f64 },

    #[error("no branch labelled `{0}` in trace")]
    UnknownBranch(String),

    #[error("no usable Rabi drive: {0}")]
    NoDrive(String),

    #[error("quadrature did not converge: 21- and 41-node averages differ by {diff:e}")]
    Quadrature { diff: f64 },

    #[error("state norm drifted by {drift:e} during propagation (limit {limit:e})")]
    NormDrift { drift: f64, limit: f64 },

    #[error("unnormalized state on trajectory node {node} (norm {norm})")]
    Unnormalized { node: usize, norm: f64 },

    #[error("root search failed: {0}")]
    Root(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Error::Invalid { key: key.to_string(), reason: reason.into() }
    }
}
