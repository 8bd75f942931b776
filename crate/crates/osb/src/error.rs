use std::io;

use thiserror::Error;

use crate::spec::SpecError;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GATE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum OsbError {
    #[error("spec: {0}")]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Core(#[from] osb_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{0}")]
    Input(String),
}

impl OsbError {
    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        OsbError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input, 3 when a mathematical gate rejects the body, 4 when a solver fails.
    pub fn exit_code(&self) -> i32 {
        use osb_core::Error as E;
        match self {
            OsbError::Core(E::ConstructionRejected { .. } | E::NotSelfPolar { .. }) => EXIT_GATE,
            OsbError::Core(E::NumericFailure { .. } | E::SingularPoint(_) | E::DegenerateBoundary(_)) => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        }
    }
}
