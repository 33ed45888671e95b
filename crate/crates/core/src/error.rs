use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("config error{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("solver did not converge: {0}")]
    Solver(String),
    #[error("step failed at t={t}: {msg}")]
    Step { t: f64, msg: String },
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config { line: None, msg: msg.into() }
    }

    pub fn config_at(line: usize, msg: impl Into<String>) -> Self {
        Error::Config { line: Some(line), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
