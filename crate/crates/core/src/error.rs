use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which state component an error or event refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Nutrient,
    Phyto,
    Zoo,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Nutrient => "n",
            Field::Phyto => "p",
            Field::Zoo => "z",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singularity: 1 + chi*n = {denominator} < 1/2 at node {node}")]
    Singularity { node: usize, denominator: f64 },

    #[error("blowup at t={t}: {reason}")]
    Blowup { t: f64, reason: String },

    #[error("explicit step dt={dt} exceeds CFL limit {max_dt}")]
    Cfl { dt: f64, max_dt: f64 },

    #[error("positivity violation at t={t}: {field}[{node}] = {value}")]
    Positivity {
        t: f64,
        field: Field,
        node: usize,
        value: f64,
    },

    #[error("zero pivot in row {0}")]
    ZeroPivot(usize),

    #[error("singular matrix")]
    SingularMatrix,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown key `{key}` (line {line})")]
    UnknownKey { key: String, line: usize },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("malformed data file {path}: {message}")]
    DataFile { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Positivity { .. } => 2,
            Error::Blowup { .. }
            | Error::Cfl { .. }
            | Error::Domain(_)
            | Error::ZeroPivot(_)
            | Error::SingularMatrix => 3,
            Error::Singularity { .. } => 4,
            _ => 1,
        }
    }
}
