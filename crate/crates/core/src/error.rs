use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped by how callers should react: `Validation` and
/// `Dimension` mean the inputs were malformed, `Numerical` means a
/// computation could not meet its contract, `Io`/`Format` wrap file
/// round-trip failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// True for errors caused by bad inputs rather than failed computations.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Dimension(_) | Error::Io(_) | Error::Format(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_of_kinds() {
        assert!(Error::validation("x").is_validation());
        assert!(Error::dimension("x").is_validation());
        assert!(!Error::numerical("x").is_validation());
    }
}
