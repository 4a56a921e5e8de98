use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid model: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("state space of {states} configurations exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: u64 },

    #[error("expanded model would have {size} elements, above the cap of {cap}")]
    ExpansionTooLarge { size: u128, cap: u64 },

    #[error("model is infeasible: every configuration has energy -inf")]
    Infeasible,

    #[error("edge graph contains a cycle")]
    CycleDetected,

    #[error("model is not attractive (binary supermodular)")]
    NotAttractive,

    #[error("graph-cut solver requires finite potentials")]
    InfiniteEntries,

    #[error("unbiased sampler rejected {0} times without accepting")]
    ExhaustedRestarts(usize),

    #[error(
        "upper-bound family is not self-reducible at level {level}: \
         step probabilities sum to {total} (tolerance {tolerance})"
    )]
    SelfReducibility {
        level: usize,
        total: f64,
        tolerance: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable category, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) | Error::InvalidModel(_) => "validation",
            Error::StateSpaceTooLarge { .. } | Error::ExpansionTooLarge { .. } => "resource_cap",
            Error::Infeasible => "infeasible",
            Error::CycleDetected => "cycle",
            Error::NotAttractive => "not_attractive",
            Error::InfiniteEntries => "infinite_entries",
            Error::ExhaustedRestarts(_) => "exhausted_restarts",
            Error::SelfReducibility { .. } => "self_reducibility",
            Error::Io(_) | Error::Csv(_) => "io",
            Error::Json(_) => "validation",
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
