use std::io;

use thiserror::Error;

use crate::krylov::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    Dimension {
        op: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{method} breakdown: |{quantity}| = {value:e} below threshold after {} iterations", .report.iterations)]
    Breakdown {
        method: &'static str,
        quantity: &'static str,
        value: f64,
        report: Box<SolveReport>,
    },

    #[error("singular preconditioner: zero diagonal entry at row {row}")]
    SingularPreconditioner { row: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn dim(op: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            op,
            expected,
            found,
        }
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
