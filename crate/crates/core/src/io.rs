//! JSON file formats.
//!
//! Rationals are written as lowest-terms `"p/q"` strings and read from
//! strings or JSON numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{MixedProfile, RankingGame, StrategySpec};
use crate::payoff::EquilibriumCertificate;
use crate::rat::Rat;
use crate::reductions::SymmetrizationMap;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    prizes: Vec<Rat>,
    players: Vec<PlayerFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlayerFile {
    strategies: Vec<StrategySpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProfileFile {
    Bare(Vec<Vec<Rat>>),
    Wrapped { profile: Vec<Vec<Rat>> },
}

/// Parses a game file. The result is not validated.
pub fn parse_game(text: &str) -> Result<RankingGame> {
    let file: GameFile = serde_json::from_str(text)?;
    if file.players.is_empty() {
        return Err(Error::Malformed("game has no players".into()));
    }
    if file.prizes.len() != file.players.len() {
        return Err(Error::Malformed(format!(
            "{} prizes for {} players",
            file.prizes.len(),
            file.players.len()
        )));
    }
    let players = file.players.into_iter().map(|p| p.strategies).collect();
    Ok(RankingGame::new(players, file.prizes))
}

pub fn write_game(game: &RankingGame) -> String {
    let file = GameFile {
        prizes: game.prizes.clone(),
        players: game
            .players
            .iter()
            .map(|s| PlayerFile { strategies: s.clone() })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("game serializes")
}

/// Accepts `[[...], ...]` or `{"profile": [[...], ...]}`, the latter being
/// what certificates and solver output contain.
pub fn parse_profile(text: &str) -> Result<MixedProfile> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let rows = match value {
        serde_json::Value::Object(mut map) => match map.remove("profile") {
            Some(inner) => serde_json::from_value::<Vec<Vec<Rat>>>(inner)?,
            None => return Err(Error::Malformed("object without a \"profile\" key".into())),
        },
        other => match serde_json::from_value::<ProfileFile>(other)? {
            ProfileFile::Bare(rows) | ProfileFile::Wrapped { profile: rows } => rows,
        },
    };
    MixedProfile::new(rows)
}

pub fn write_profile(profile: &MixedProfile) -> String {
    serde_json::to_string_pretty(&profile.rows).expect("profile serializes")
}

pub fn parse_certificate(text: &str) -> Result<EquilibriumCertificate> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_symmetrization_map(text: &str) -> Result<SymmetrizationMap> {
    let map: SymmetrizationMap = serde_json::from_str(text)?;
    let rungs = map.ladder.len();
    if let Some(i) = map.players.iter().position(|row| row.len() != rungs) {
        return Err(Error::Malformed(format!(
            "player {i} has {} rungs, ladder has {rungs}",
            map.players[i].len()
        )));
    }
    Ok(map)
}
