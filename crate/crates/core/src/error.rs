use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),

    #[error("cell indices start at 1")]
    ZeroCell,

    #[error("normalization did not reach tolerance {tolerance:e} (error estimate {estimate:e})")]
    Normalization { tolerance: f64, estimate: f64 },

    #[error("L* is only used for theta = 1 profiles, got theta = {0}")]
    LstarTheta(f64),

    #[error("L* integral diverges: {0}")]
    LstarDivergent(&'static str),

    #[error("quadrature failed to converge (error estimate {0:e})")]
    Quadrature(f64),

    #[error("no asymptotic constant: {0}")]
    NoAsymptotic(String),

    #[error("normalizing sequence needs n >= 16, got {0}")]
    NormalizerDomain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid checkpoint grid: {0}")]
    InvalidGrid(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("study precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
