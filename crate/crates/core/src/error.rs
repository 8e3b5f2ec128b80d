use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "xi = {xi} lies in the oracle-only band [{lo}, {hi}] where neither closed-form branch \
         converges; use the generating-function (oracle) route"
    )]
    OracleOnlyBand { xi: f64, lo: f64, hi: f64 },

    #[error(
        "{what}: series not converged after {terms} terms \
         (estimated error {est_error:e}, cancellation ratio {cancellation:e})"
    )]
    NonConvergence {
        what: &'static str,
        terms: usize,
        est_error: f64,
        cancellation: f64,
    },

    #[error("normalization residual {residual:e} exceeds {limit:e} at t = {t}")]
    Integrity { t: u64, residual: f64, limit: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("graph error: {0}")]
    Graph(String),

    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(
        "sampler table reached the size cap {t_max} with survival mass {achieved:e} \
         above eps_tail {eps_tail:e}; raise the cap"
    )]
    TailBudget { t_max: usize, achieved: f64, eps_tail: f64 },

    #[error("empty ensemble")]
    EmptyEnsemble,
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::OracleOnlyBand { .. } => "oracle_only_band",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Integrity { .. } => "integrity",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Graph(_) => "graph",
            Error::Parse { .. } => "parse",
            Error::TailBudget { .. } => "tail_budget",
            Error::EmptyEnsemble => "empty_ensemble",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
