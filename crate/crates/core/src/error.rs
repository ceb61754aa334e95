use alloc::string::String;

/// Failure modes shared by all modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("grid mismatch between operands")]
    Dimension,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("translation {0} is not a multiple of the grid spacing")]
    Alignment(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("state leaves the grid: {0}")]
    OffGrid(String),
    #[error("basis too small: {0}")]
    BasisTooSmall(String),
    #[error("not perfect data: {0}")]
    NotPerfectData(String),
    #[error("undecidable at this ladder: {0}")]
    Undecidable(String),
    #[error("no adapted sequence: {0}")]
    NoAdaptedSequence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
