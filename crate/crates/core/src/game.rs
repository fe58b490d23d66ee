//! Game representations, validation and payoff-preserving preprocessing.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;

/// One pure strategy: an effort cost and the score it achieves.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub cost: Rat,
    pub score: Rat,
}

impl StrategySpec {
    pub fn new(cost: Rat, score: Rat) -> Self {
        StrategySpec { cost, score }
    }
}

/// A competitiveness-based ranking game. Players are ranked by the score of
/// the strategy they pick, win the prize of their rank (shared on ties) and pay
/// the cost of that strategy.
///
/// Construction does not enforce the monotonicity invariants; call
/// [`validate`] to list what is violated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RankingGame {
    pub players: Vec<Vec<StrategySpec>>,
    pub prizes: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoPlayers,
    EmptyStrategySet { player: usize },
    CostNotIncreasing { player: usize, index: usize },
    ScoreNotIncreasing { player: usize, index: usize },
    PrizeIncrease { rank: usize },
    FlatPrizes,
    PrizeCountMismatch { prizes: usize, players: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoPlayers => write!(f, "game has no players"),
            Violation::EmptyStrategySet { player } => {
                write!(f, "player {player} has no strategies")
            }
            Violation::CostNotIncreasing { player, index } => write!(
                f,
                "strict cost monotonicity fails for player {player} at strategy {index}"
            ),
            Violation::ScoreNotIncreasing { player, index } => write!(
                f,
                "strict score monotonicity fails for player {player} at strategy {index}"
            ),
            Violation::PrizeIncrease { rank } => {
                write!(f, "prize at rank {} exceeds prize at rank {}", rank + 1, rank)
            }
            Violation::FlatPrizes => write!(f, "u_1 > u_d required"),
            Violation::PrizeCountMismatch { prizes, players } => {
                write!(f, "{prizes} prizes for {players} players")
            }
        }
    }
}

impl RankingGame {
    pub fn new(players: Vec<Vec<StrategySpec>>, prizes: Vec<Rat>) -> Self {
        RankingGame { players, prizes }
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn num_strategies(&self, player: usize) -> usize {
        self.players[player].len()
    }

    pub fn strategy_counts(&self) -> Vec<usize> {
        self.players.iter().map(Vec::len).collect()
    }

    pub fn cost(&self, player: usize, strategy: usize) -> &Rat {
        &self.players[player][strategy].cost
    }

    pub fn score(&self, player: usize, strategy: usize) -> &Rat {
        &self.players[player][strategy].score
    }

    /// Prizes truncated or zero-padded to one per player.
    pub fn effective_prizes(&self) -> Vec<Rat> {
        let d = self.num_players();
        (0..d)
            .map(|k| self.prizes.get(k).cloned().unwrap_or_else(Rat::zero))
            .collect()
    }

    /// True when two strategies of different players share a score.
    pub fn has_ties(&self) -> bool {
        let mut seen = std::collections::HashMap::new();
        for (i, strategies) in self.players.iter().enumerate() {
            for s in strategies {
                if let Some(&owner) = seen.get(&s.score) {
                    if owner != i {
                        return true;
                    }
                } else {
                    seen.insert(s.score.clone(), i);
                }
            }
        }
        false
    }

    /// Every player has the same list of scores.
    pub fn is_score_symmetric(&self) -> bool {
        let Some(first) = self.players.first() else {
            return true;
        };
        self.players.iter().all(|p| {
            p.len() == first.len() && p.iter().zip(first).all(|(a, b)| a.score == b.score)
        })
    }

    /// Single-prize games have `u_2 = ... = u_d = u_d`, i.e. one strictly
    /// better prize.
    pub fn is_single_prize(&self) -> bool {
        let u = self.effective_prizes();
        match u.last() {
            Some(last) => u[1..].iter().all(|x| x == last),
            None => false,
        }
    }

    /// If the effective prizes are `a - k*b` for ranks `k = 1..d`, returns `(a, b)`.
    pub fn linear_prize_coefficients(&self) -> Option<(Rat, Rat)> {
        let u = self.effective_prizes();
        if u.len() < 2 {
            return None;
        }
        let b = &u[0] - &u[1];
        let a = &u[0] + &b;
        let fits = u
            .iter()
            .enumerate()
            .all(|(k, uk)| *uk == &a - &(&b * &Rat::from_int(k as i64 + 1)));
        (fits && !b.is_negative()).then_some((a, b))
    }

    pub fn check_profile(&self, profile: &MixedProfile) -> Result<()> {
        if profile.rows.len() != self.num_players() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows for {} players",
                profile.rows.len(),
                self.num_players()
            )));
        }
        for (i, row) in profile.rows.iter().enumerate() {
            if row.len() != self.num_strategies(i) {
                return Err(Error::DimensionMismatch(format!(
                    "player {i}: {} probabilities for {} strategies",
                    row.len(),
                    self.num_strategies(i)
                )));
            }
        }
        Ok(())
    }
}

/// All players share one score ladder; costs stay player specific.
///
/// Cost rows are only required to be non-decreasing: symmetrizing a general
/// game produces weakly dominated copies that repeat the cost of the strategy
/// dominating them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScoreSymmetricGame {
    pub scores: Vec<Rat>,
    pub costs: Vec<Vec<Rat>>,
    pub prizes: Vec<Rat>,
}

impl ScoreSymmetricGame {
    pub fn new(scores: Vec<Rat>, costs: Vec<Vec<Rat>>, prizes: Vec<Rat>) -> Result<Self> {
        let g = ScoreSymmetricGame { scores, costs, prizes };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.costs.is_empty() {
            problems.push(Violation::NoPlayers);
        }
        if self.scores.is_empty() {
            problems.push(Violation::EmptyStrategySet { player: 0 });
        }
        for j in 1..self.scores.len() {
            if self.scores[j] <= self.scores[j - 1] {
                problems.push(Violation::ScoreNotIncreasing { player: 0, index: j });
            }
        }
        for (i, row) in self.costs.iter().enumerate() {
            if row.len() != self.scores.len() {
                return Err(Error::Malformed(format!(
                    "player {i} has {} costs for {} scores",
                    row.len(),
                    self.scores.len()
                )));
            }
            for j in 1..row.len() {
                if row[j] < row[j - 1] {
                    problems.push(Violation::CostNotIncreasing { player: i, index: j });
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGame(problems))
        }
    }

    pub fn num_players(&self) -> usize {
        self.costs.len()
    }

    pub fn num_strategies(&self) -> usize {
        self.scores.len()
    }

    pub fn effective_prizes(&self) -> Vec<Rat> {
        let d = self.num_players();
        (0..d)
            .map(|k| self.prizes.get(k).cloned().unwrap_or_else(Rat::zero))
            .collect()
    }

    pub fn to_ranking(&self) -> RankingGame {
        let players = self
            .costs
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.scores)
                    .map(|(c, s)| StrategySpec::new(c.clone(), s.clone()))
                    .collect()
            })
            .collect();
        RankingGame::new(players, self.prizes.clone())
    }

    /// Succeeds when every player of `game` has the same score list.
    pub fn from_ranking(game: &RankingGame) -> Result<Self> {
        if !game.is_score_symmetric() {
            return Err(Error::Precondition("game is not score-symmetric".into()));
        }
        let scores = game
            .players
            .first()
            .map(|p| p.iter().map(|s| s.score.clone()).collect())
            .unwrap_or_default();
        let costs = game
            .players
            .iter()
            .map(|p| p.iter().map(|s| s.cost.clone()).collect())
            .collect();
        ScoreSymmetricGame::new(scores, costs, game.prizes.clone())
    }
}

/// One probability vector per player.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MixedProfile {
    pub rows: Vec<Vec<Rat>>,
}

impl MixedProfile {
    /// Checks every entry is non-negative and every row sums to one.
    pub fn new(rows: Vec<Vec<Rat>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::Malformed(format!("player {i} has an empty row")));
            }
            if let Some(j) = row.iter().position(Rat::is_negative) {
                return Err(Error::Malformed(format!(
                    "player {i} strategy {j} has negative probability"
                )));
            }
            let total: Rat = row.iter().sum();
            if !total.is_one() {
                return Err(Error::Malformed(format!("player {i} row sums to {total}")));
            }
        }
        Ok(MixedProfile { rows })
    }

    /// Pure profile: player `i` plays `choice[i]` out of `counts[i]` strategies.
    pub fn pure(choice: &[usize], counts: &[usize]) -> Self {
        let rows = choice
            .iter()
            .zip(counts)
            .map(|(&c, &n)| {
                (0..n)
                    .map(|j| if j == c { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        MixedProfile { rows }
    }

    pub fn uniform(counts: &[usize]) -> Self {
        let rows = counts
            .iter()
            .map(|&n| vec![Rat::new(1, n as i64); n])
            .collect();
        MixedProfile { rows }
    }

    pub fn num_players(&self) -> usize {
        self.rows.len()
    }

    pub fn support(&self, player: usize) -> Vec<usize> {
        self.rows[player]
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
            .map(|(j, _)| j)
            .collect()
    }

    /// If every row is a point mass, the chosen indices.
    pub fn as_pure(&self) -> Option<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| row.iter().position(Rat::is_one))
            .collect()
    }
}

/// Lists every violated invariant of the ranking-game model.
pub fn validate(game: &RankingGame) -> Vec<Violation> {
    let mut out = Vec::new();
    if game.players.is_empty() {
        out.push(Violation::NoPlayers);
    }
    for (i, strategies) in game.players.iter().enumerate() {
        if strategies.is_empty() {
            out.push(Violation::EmptyStrategySet { player: i });
        }
        for j in 1..strategies.len() {
            if strategies[j].cost <= strategies[j - 1].cost {
                out.push(Violation::CostNotIncreasing { player: i, index: j });
            }
            if strategies[j].score <= strategies[j - 1].score {
                out.push(Violation::ScoreNotIncreasing { player: i, index: j });
            }
        }
    }
    for k in 1..game.prizes.len() {
        if game.prizes[k] > game.prizes[k - 1] {
            out.push(Violation::PrizeIncrease { rank: k + 1 });
        }
    }
    if !game.players.is_empty() {
        if game.prizes.len() != game.players.len() {
            out.push(Violation::PrizeCountMismatch {
                prizes: game.prizes.len(),
                players: game.players.len(),
            });
        }
        let u = game.effective_prizes();
        if u.first() <= u.last() {
            out.push(Violation::FlatPrizes);
        }
    }
    out
}

/// Affine maps and deletions performed by [`normalize`]; lets payoffs and
/// profiles be carried back to the original game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationRecord {
    /// `u_d` of the original (resized) prize vector, subtracted from every prize.
    pub prize_shift: Rat,
    /// `u_1 - u_d`, the divisor applied to prizes and costs.
    pub scale: Rat,
    /// Per player, the scaled cost of its weakest strategy, subtracted afterwards.
    pub cost_shift: Vec<Rat>,
    /// Per player, original indices of the strategies that survived.
    pub kept: Vec<Vec<usize>>,
    /// Per player, original indices removed for costing more than the prize range.
    pub removed: Vec<Vec<usize>>,
    /// Prizes beyond rank `d` that were discarded.
    pub discarded_prizes: Vec<Rat>,
    /// Number of zero prizes appended.
    pub padded_prizes: usize,
}

impl NormalizationRecord {
    /// Maps a payoff of the normalized game back to the original units.
    pub fn original_payoff(&self, player: usize, normalized: &Rat) -> Rat {
        &self.prize_shift + &(&self.scale * &(normalized - &self.cost_shift[player]))
    }

    /// Re-inserts zero probabilities for removed strategies.
    pub fn lift_profile(&self, profile: &MixedProfile) -> MixedProfile {
        let rows = profile
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n = self.kept[i].len() + self.removed[i].len();
                let mut full = vec![Rat::zero(); n];
                for (p, &orig) in row.iter().zip(&self.kept[i]) {
                    full[orig] = p.clone();
                }
                full
            })
            .collect();
        MixedProfile { rows }
    }

    /// Restricts an original-game profile to the surviving strategies. Fails if
    /// it puts mass on a removed strategy.
    pub fn restrict_profile(&self, profile: &MixedProfile) -> Option<MixedProfile> {
        let mut rows = Vec::with_capacity(profile.rows.len());
        for (i, row) in profile.rows.iter().enumerate() {
            if self.removed[i].iter().any(|&j| row[j].is_positive()) {
                return None;
            }
            rows.push(self.kept[i].iter().map(|&j| row[j].clone()).collect());
        }
        Some(MixedProfile { rows })
    }
}

/// Rescales a valid game so that `u_1 = 1`, `u_d = 0`, every player's weakest
/// strategy costs zero and no strategy costs more than one.
pub fn normalize(game: &RankingGame) -> Result<(RankingGame, NormalizationRecord)> {
    let violations: Vec<_> = validate(game)
        .into_iter()
        .filter(|v| !matches!(v, Violation::PrizeCountMismatch { .. } | Violation::FlatPrizes))
        .collect();
    if !violations.is_empty() {
        return Err(Error::InvalidGame(violations));
    }
    let d = game.num_players();
    let discarded_prizes = game.prizes.iter().skip(d).cloned().collect();
    let padded_prizes = d.saturating_sub(game.prizes.len());
    let u = game.effective_prizes();
    let prize_shift = u[d - 1].clone();
    let scale = &u[0] - &prize_shift;
    if !scale.is_positive() {
        return Err(Error::FlatPrizes);
    }
    let prizes = u.iter().map(|x| &(x - &prize_shift) / &scale).collect();

    let mut players = Vec::with_capacity(d);
    let mut cost_shift = Vec::with_capacity(d);
    let mut kept = Vec::with_capacity(d);
    let mut removed = Vec::with_capacity(d);
    for strategies in &game.players {
        let shift = &strategies[0].cost / &scale;
        let mut row = Vec::new();
        let mut keep = Vec::new();
        let mut drop = Vec::new();
        for (j, s) in strategies.iter().enumerate() {
            let cost = &(&s.cost / &scale) - &shift;
            if cost > Rat::one() {
                drop.push(j);
            } else {
                keep.push(j);
                row.push(StrategySpec::new(cost, s.score.clone()));
            }
        }
        players.push(row);
        cost_shift.push(shift);
        kept.push(keep);
        removed.push(drop);
    }
    let record = NormalizationRecord {
        prize_shift,
        scale,
        cost_shift,
        kept,
        removed,
        discarded_prizes,
        padded_prizes,
    };
    Ok((RankingGame::new(players, prizes), record))
}

/// Removes same-player strategies dominated by another with no more cost and
/// no less score. Identical pairs keep the lowest index. Returns the reduced
/// game and, per player, the original indices kept (in score order).
pub fn eliminate_degenerate_with_map(game: &RankingGame) -> (RankingGame, Vec<Vec<usize>>) {
    let mut players = Vec::with_capacity(game.num_players());
    let mut maps = Vec::with_capacity(game.num_players());
    for strategies in &game.players {
        let mut keep: Vec<usize> = (0..strategies.len())
            .filter(|&j| {
                let a = &strategies[j];
                !strategies.iter().enumerate().any(|(k, b)| {
                    if k == j {
                        return false;
                    }
                    let weakly = b.cost <= a.cost && b.score >= a.score;
                    let identical = b.cost == a.cost && b.score == a.score;
                    weakly && (!identical || k < j)
                })
            })
            .collect();
        keep.sort_by(|&x, &y| strategies[x].score.cmp(&strategies[y].score));
        players.push(keep.iter().map(|&j| strategies[j].clone()).collect());
        maps.push(keep);
    }
    (RankingGame::new(players, game.prizes.clone()), maps)
}

pub fn eliminate_degenerate(game: &RankingGame) -> RankingGame {
    eliminate_degenerate_with_map(game).0
}

/// Sorted union of every score appearing in the game.
pub fn score_ladder(game: &RankingGame) -> Vec<Rat> {
    let set: BTreeSet<Rat> = game
        .players
        .iter()
        .flat_map(|p| p.iter().map(|s| s.score.clone()))
        .collect();
    set.into_iter().collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    pub fn player(pairs: &[(&str, &str)]) -> Vec<StrategySpec> {
        pairs
            .iter()
            .map(|(c, s)| StrategySpec::new(r(c), r(s)))
            .collect()
    }

    /// Two players, row stronger; unique equilibrium is uniform/uniform.
    pub fn example_one() -> RankingGame {
        RankingGame::new(
            vec![
                player(&[("0", "3"), ("1/2", "5")]),
                player(&[("0", "2"), ("1/2", "4")]),
            ],
            vec![r("1"), r("0")],
        )
    }

    /// Two players, three shared actions, no pure equilibrium.
    pub fn three_action() -> RankingGame {
        RankingGame::new(
            vec![
                player(&[("0", "1"), ("2/3", "2"), ("4/5", "3")]),
                player(&[("0", "1"), ("1/3", "2"), ("2/3", "3")]),
            ],
            vec![r("1"), r("0")],
        )
    }
}
