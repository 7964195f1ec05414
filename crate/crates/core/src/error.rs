use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("solver aborted at t = {time:.6e} after {halvings} step halvings: {reason}")]
    SolverAbort {
        time: f64,
        halvings: usize,
        reason: String,
        dump: Option<String>,
    },

    #[error("test support uncovered: {0}")]
    SupportUncovered(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
