use thiserror::Error;

use crate::game::Violation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRatError(String);

impl ParseRatError {
    pub(crate) fn new(text: &str) -> Self {
        let mut shown: String = text.chars().take(64).collect();
        if text.chars().count() > 64 {
            shown.push_str("...");
        }
        ParseRatError(shown)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {}", format_violations(.0))]
    InvalidGame(Vec<Violation>),

    #[error("prizes are all equal after truncation; u_1 > u_d is required")]
    FlatPrizes,

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("profile does not match the game: {0}")]
    DimensionMismatch(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Rat(#[from] ParseRatError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
