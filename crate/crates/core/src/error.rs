use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} needs {sites} sites, above the limit of {max}")]
    Capacity {
        what: &'static str,
        sites: usize,
        max: usize,
    },

    #[error("site index {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ground level of H(t = {t}) is degenerate (gap {gap:e} <= {tol:e})")]
    DegenerateGround { t: f64, gap: f64, tol: f64 },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    EigenNonConvergence { dim: usize },

    #[error("norm drift {drift:e} at t = {t} exceeds tolerance {tol:e}; try a smaller dt")]
    NormDrift { drift: f64, t: f64, tol: f64 },

    #[error("state became non-finite at t = {t}; dt is too large")]
    NonFinite { t: f64 },

    #[error("only {found} samples fall in the averaging window, need at least 2")]
    TooFewSamples { found: usize },

    #[error("sweep point (j1 = {j1}, j2 = {j2}, r = {r}) failed: {source}")]
    SweepPoint {
        j1: f64,
        j2: f64,
        r: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("grid has {points} points, above the cap of {cap}")]
    GridTooLarge { points: usize, cap: usize },

    #[error("heatmap input: {0}")]
    Heatmap(String),

    #[error("{location}: {key}: {message}")]
    Config {
        location: String,
        key: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for this failure: 1 for bad configuration or input,
    /// 2 for numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. }
            | Error::SiteOutOfRange { .. }
            | Error::InvalidArgument(_)
            | Error::GridTooLarge { .. }
            | Error::Heatmap(_)
            | Error::Config { .. } => 1,
            Error::DegenerateGround { .. }
            | Error::EigenNonConvergence { .. }
            | Error::NormDrift { .. }
            | Error::NonFinite { .. }
            | Error::TooFewSamples { .. } => 2,
            Error::SweepPoint { source, .. } => source.exit_code(),
            Error::Io { .. } => 3,
        }
    }
}
