use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument outside the domain of the operation: {0}")]
    OutOfDomain(String),

    /// The parameter point sits on (or numerically next to) one of the
    /// bifurcation curves, where roots are not simple.
    #[error("(a, d) = ({a}, {d}) is within {tol:e} of the bifurcation curve {curve}")]
    BoundaryDegenerate {
        a: f64,
        d: f64,
        curve: &'static str,
        tol: f64,
    },

    #[error("singular derivative: {0}")]
    Singular(String),

    #[error("negative discriminant {0:e} for the critical points of the m-map")]
    NegativeDiscriminant(f64),

    #[error("no standing front found: {0}")]
    NotFound(String),

    #[error("integration blew up at t = {t} (site {site}, value {value})")]
    BlowUp { t: f64, site: usize, value: f64 },

    #[error("no interface crossing at level {level} in sample at t = {t}")]
    NoInterface { level: f64, t: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
