use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("system is not asymptotically stable (spectral abscissa {abscissa:.6e})")]
    Unstable { abscissa: f64 },

    #[error("duplicate candidate id `{0}`")]
    DuplicateCandidate(String),

    #[error("candidate `{0}` has an all-zero column")]
    ZeroColumn(String),

    #[error("unknown candidate id `{0}`")]
    UnknownCandidate(String),

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.6e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("Lyapunov residual {residual:.3e} exceeds bound {bound:.3e}")]
    Residual { residual: f64, bound: f64 },

    #[error("candidate `{id}`: {source}")]
    Candidate {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("system is not controllable at the requested horizon (numerical rank {rank} of {n})")]
    Uncontrollable { rank: usize, n: usize },

    #[error("weight matrix must have full row rank (rank {rank}, rows {rows}, columns {cols})")]
    WeightRank { rank: usize, rows: usize, cols: usize },

    #[error("metric `{0}` is not supported by this operation")]
    UnsupportedMetric(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("certified bound unavailable: marginal gains at the greedy set are not all finite")]
    BoundUnavailable,

    #[error("enumeration limit exceeded: {count} subsets (limit {limit})")]
    EnumerationLimit { count: u128, limit: u128 },

    #[error("no valid samples after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("quadrature did not converge after {doublings} panel doublings (last change {change:.3e})")]
    QuadratureDiverged { doublings: usize, change: f64 },

    #[error("matrix is numerically singular at t = {t}")]
    Singular { t: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical pipeline, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPsd { .. }
            | Error::Residual { .. }
            | Error::Uncontrollable { .. }
            | Error::QuadratureDiverged { .. }
            | Error::Singular { .. }
            | Error::BoundUnavailable => true,
            Error::Candidate { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
