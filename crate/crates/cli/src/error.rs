use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: `{key}`: {message}")]
    Config { line: usize, key: String, message: String },

    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },

    #[error(transparent)]
    Core(#[from] iga_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}
