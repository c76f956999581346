use thiserror::Error;

/// Errors raised anywhere in the homogenization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("periodicity error: {message} (offending nodes: {nodes:?})")]
    Periodicity { message: String, nodes: Vec<usize> },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("msh parse error at line {line}: {message}")]
    MshParse { line: usize, message: String },

    #[error("material error: {0}")]
    Material(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("solvability check failed for case {case}: residual {residual:.3e} exceeds {limit:.3e}")]
    Solvability { case: String, residual: f64, limit: f64 },

    #[error("symmetry violation while packing {tensor}: relative asymmetry {asymmetry:.3e}")]
    Symmetry { tensor: String, asymmetry: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("verification error: {0}")]
    Verify(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Broad category used by the CLI to pick an exit code.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Geometry(_) | Error::Periodicity { .. } | Error::Mesh(_) | Error::MshParse { .. } => {
                ErrorKind::Geometry
            }
            Error::Solver(_) | Error::Solvability { .. } | Error::Symmetry { .. } => ErrorKind::Solver,
            Error::Verify(_) => ErrorKind::Verify,
            Error::Material(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => ErrorKind::Config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Geometry,
    Solver,
    Verify,
}
