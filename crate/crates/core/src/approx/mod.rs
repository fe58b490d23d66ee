//! Approximation schemes for score-symmetric games.

mod fptas;
mod ptas;
mod rounding;

pub use fptas::{
    fptas_replay, fptas_solve, fptas_solve_with, FilterViolation, FptasOptions, FptasResult,
    FptasState, FptasStats,
};
pub use ptas::{ptas_candidate_count, ptas_enumerated_count, ptas_solve, PtasResult, StrategyGrid, TypeClass};
pub use rounding::{epsilon_round, inverse_integer_floor, round_costs_down};
