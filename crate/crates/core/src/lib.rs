//! Exact and approximate equilibrium solvers for competitiveness-based
//! ranking games.

pub mod approx;
pub mod error;
pub mod exact;
pub mod game;
pub mod gen;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod payoff;
pub mod rat;
pub mod reductions;

pub use error::{Error, Result};
pub use game::{
    normalize, validate, MixedProfile, NormalizationRecord, RankingGame, ScoreSymmetricGame,
    StrategySpec, Violation,
};
pub use payoff::{verify, verify_ranking, verify_symmetric, EquilibriumCertificate, PayoffPath, Welfare};
pub use rat::Rat;
