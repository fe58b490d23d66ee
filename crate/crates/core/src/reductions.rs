//! Score symmetrization with equilibrium lift-back, and the polymatrix form of
//! linear-prize games.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{score_ladder, MixedProfile, RankingGame, ScoreSymmetricGame};
use crate::rat::Rat;

/// Where a rung of a player's symmetrized strategy list came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategySource {
    /// The player's own strategy with this original index.
    Original { index: usize },
    /// Added copy carrying the cost of original strategy `of`, the weakest
    /// one scoring above this rung.
    Copy { of: usize },
    /// Added above every original strategy of the player.
    Padding,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub score: Rat,
    pub cost: Rat,
    pub source: StrategySource,
    /// Original strategy that receives this rung's mass on lift-back.
    pub dominated_by: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetrizationMap {
    pub ladder: Vec<Rat>,
    pub players: Vec<Vec<LadderEntry>>,
}

impl SymmetrizationMap {
    pub fn is_identity(&self) -> bool {
        self.players.iter().all(|row| {
            row.iter()
                .all(|e| matches!(e.source, StrategySource::Original { .. }))
        })
    }

    /// Ladder position of original strategy `index` of `player`.
    pub fn position_of(&self, player: usize, index: usize) -> Option<usize> {
        self.players[player]
            .iter()
            .position(|e| e.source == StrategySource::Original { index })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }
}

/// Gives every player a strategy at every score used by anyone.
///
/// A missing score `s` is filled with the cost of the player's weakest
/// strategy scoring above `s`; when none exists the rung costs the full prize
/// range above the player's cheapest strategy (1 on a normalized game), which
/// makes it weakly dominated by that cheapest strategy.
pub fn score_symmetrize(game: &RankingGame) -> Result<(ScoreSymmetricGame, SymmetrizationMap)> {
    if game.num_players() == 0 || game.players.iter().any(Vec::is_empty) {
        return Err(Error::Precondition("every player needs a strategy".into()));
    }
    let ladder = score_ladder(game);
    let u = game.effective_prizes();
    let range = &u[0] - &u[u.len() - 1];
    let mut players = Vec::with_capacity(game.num_players());
    for strategies in &game.players {
        let top_cost = strategies.last().map(|s| s.cost.clone()).unwrap();
        let padding_cost = (&strategies[0].cost + &range).max(top_cost);
        let row = ladder
            .iter()
            .map(|score| {
                if let Some(index) = strategies.iter().position(|s| &s.score == score) {
                    return LadderEntry {
                        score: score.clone(),
                        cost: strategies[index].cost.clone(),
                        source: StrategySource::Original { index },
                        dominated_by: index,
                    };
                }
                match strategies.iter().position(|s| &s.score > score) {
                    Some(of) => LadderEntry {
                        score: score.clone(),
                        cost: strategies[of].cost.clone(),
                        source: StrategySource::Copy { of },
                        dominated_by: of,
                    },
                    None => LadderEntry {
                        score: score.clone(),
                        cost: padding_cost.clone(),
                        source: StrategySource::Padding,
                        dominated_by: 0,
                    },
                }
            })
            .collect();
        players.push(row);
    }
    let costs = players
        .iter()
        .map(|row: &Vec<LadderEntry>| row.iter().map(|e| e.cost.clone()).collect())
        .collect();
    let sym = ScoreSymmetricGame::new(ladder.clone(), costs, game.prizes.clone())?;
    Ok((sym, SymmetrizationMap { ladder, players }))
}

/// Moves the mass of every added rung onto the original strategy dominating it.
pub fn lift_back(profile: &MixedProfile, map: &SymmetrizationMap, game: &RankingGame) -> MixedProfile {
    let rows = profile
        .rows
        .iter()
        .zip(&map.players)
        .enumerate()
        .map(|(i, (row, entries))| {
            let mut out = vec![Rat::zero(); game.num_strategies(i)];
            for (p, e) in row.iter().zip(entries) {
                if p.is_positive() {
                    out[e.dominated_by] += p;
                }
            }
            out
        })
        .collect();
    MixedProfile { rows }
}

/// Maps an original-game profile onto the symmetrized ladder.
pub fn embed(profile: &MixedProfile, map: &SymmetrizationMap) -> MixedProfile {
    let rows = profile
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut out = vec![Rat::zero(); map.ladder.len()];
            for (j, p) in row.iter().enumerate() {
                let pos = map.position_of(i, j).expect("original strategy on ladder");
                out[pos] = p.clone();
            }
            out
        })
        .collect();
    MixedProfile { rows }
}

/// Pairwise decomposition of a linear-prize game. Every pair of players plays
/// a constant-sum game in which the lower scorer loses `b`; a single-strategy
/// nature vertex pays each player `a - b - cost`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolymatrixGame {
    pub strategy_counts: Vec<usize>,
    /// `edges[i][k][j][l]`: payoff to `i` playing `j` against `k` playing `l`.
    /// `edges[i][i]` is empty.
    pub edges: Vec<Vec<Vec<Vec<Rat>>>>,
    /// `nature[i][j]`: payoff to `i` on its nature edge; nature receives the negation.
    pub nature: Vec<Vec<Rat>>,
}

impl PolymatrixGame {
    pub fn num_players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn pure_payoffs(&self, choice: &[usize]) -> Vec<Rat> {
        (0..self.num_players())
            .map(|i| {
                let mut total = self.nature[i][choice[i]].clone();
                for (k, &l) in choice.iter().enumerate() {
                    if k != i {
                        total += &self.edges[i][k][choice[i]][l];
                    }
                }
                total
            })
            .collect()
    }

    /// Payoff of pure strategy `j` for `i` against mixed opponents.
    pub fn expected_payoff(&self, profile: &MixedProfile, i: usize, j: usize) -> Rat {
        let mut total = self.nature[i][j].clone();
        for (k, row) in profile.rows.iter().enumerate() {
            if k == i {
                continue;
            }
            for (l, p) in row.iter().enumerate() {
                if !p.is_zero() {
                    total += p * &self.edges[i][k][j][l];
                }
            }
        }
        total
    }

    /// Sum of the two payoffs on every player-player edge, if it is the same
    /// constant for all entries of all edges.
    pub fn edge_constant(&self) -> Option<Rat> {
        let mut constant: Option<Rat> = None;
        for i in 0..self.num_players() {
            for k in i + 1..self.num_players() {
                for j in 0..self.strategy_counts[i] {
                    for l in 0..self.strategy_counts[k] {
                        let s = &self.edges[i][k][j][l] + &self.edges[k][i][l][j];
                        match &constant {
                            None => constant = Some(s),
                            Some(c) if *c != s => return None,
                            _ => {}
                        }
                    }
                }
            }
        }
        Some(constant.unwrap_or_else(Rat::zero))
    }
}

pub fn build_polymatrix(game: &RankingGame, a: &Rat, b: &Rat) -> Result<PolymatrixGame> {
    if game.has_ties() {
        return Err(Error::Precondition(
            "polymatrix form needs distinct scores".into(),
        ));
    }
    let d = game.num_players();
    let counts = game.strategy_counts();
    let loss = -b.clone();
    let edges = (0..d)
        .map(|i| {
            (0..d)
                .map(|k| {
                    if k == i {
                        return Vec::new();
                    }
                    (0..counts[i])
                        .map(|j| {
                            (0..counts[k])
                                .map(|l| {
                                    if game.score(i, j) > game.score(k, l) {
                                        Rat::zero()
                                    } else {
                                        loss.clone()
                                    }
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let base = a - b;
    let nature = (0..d)
        .map(|i| (0..counts[i]).map(|j| &base - game.cost(i, j)).collect())
        .collect();
    Ok(PolymatrixGame { strategy_counts: counts, edges, nature })
}
