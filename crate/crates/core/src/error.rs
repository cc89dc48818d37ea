use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("channel `{channel}` has zero variance")]
    DegenerateChannel { channel: String },
    #[error("time series has no class labels")]
    MissingLabels,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("precision matrix has non-positive diagonal entry at index {index}")]
    NumericalDegeneracy { index: usize },
    #[error("regression oracle not applicable: {0}")]
    OracleInapplicable(String),
    #[error("graph has {vertices} vertices, above the oracle bound of {bound}")]
    OracleBound { vertices: usize, bound: usize },
    #[error("training diverged at epoch {epoch} (loss is not finite); try a learning rate below {lr}")]
    Divergence { epoch: usize, lr: f64 },
    #[error("label error: {0}")]
    Label(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Coarse grouping of [`Error`] variants, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidSpec(_) | Error::OracleBound { .. } => ErrorClass::Config,
            Error::Shape(_)
            | Error::NonFinite(_)
            | Error::DegenerateChannel { .. }
            | Error::MissingLabels
            | Error::Label(_)
            | Error::InsufficientData(_) => ErrorClass::Data,
            Error::NumericalDegeneracy { .. }
            | Error::OracleInapplicable(_)
            | Error::Divergence { .. }
            | Error::Invariant(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
