//! Pure and expected payoffs, regret, and well-supported equilibrium
//! certificates.
//!
//! Expected payoffs have two exact routes. [`expected_payoff_enum`] sums over
//! every pure profile of the opponents. [`expected_payoff_counts`] folds the
//! opponents one at a time into a [`TieCountDistribution`] over (players
//! strictly above, players tied), which is polynomial in the player count.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{MixedProfile, RankingGame, ScoreSymmetricGame};
use crate::rat::Rat;

/// Prefix sums of the effective prize vector: `prefix[k] = u_1 + ... + u_k`.
pub(crate) fn prize_prefix(prizes: &[Rat]) -> Vec<Rat> {
    let mut prefix = Vec::with_capacity(prizes.len() + 1);
    prefix.push(Rat::zero());
    for u in prizes {
        let next = prefix.last().unwrap() + u;
        prefix.push(next);
    }
    prefix
}

/// Share of a player ranked below `above` others and tied with `tied` others.
pub(crate) fn share(prefix: &[Rat], above: usize, tied: usize) -> Rat {
    let total = &prefix[above + tied + 1] - &prefix[above];
    total / Rat::from_int(tied as i64 + 1)
}

/// Payoff of every player when each plays `choice[i]`. Tied players split the
/// prizes of the rank positions they jointly occupy.
pub fn pure_payoffs(game: &RankingGame, choice: &[usize]) -> Vec<Rat> {
    let prefix = prize_prefix(&game.effective_prizes());
    let scores: Vec<&Rat> = choice
        .iter()
        .enumerate()
        .map(|(i, &j)| game.score(i, j))
        .collect();
    (0..game.num_players())
        .map(|i| {
            let above = scores.iter().filter(|s| **s > scores[i]).count();
            let tied = scores.iter().filter(|s| **s == scores[i]).count() - 1;
            share(&prefix, above, tied) - game.cost(i, choice[i])
        })
        .collect()
}

/// Expected payoff of `player` for pure strategy `strategy`, by enumerating
/// every opponent pure profile with positive probability.
pub fn expected_payoff_enum(
    game: &RankingGame,
    profile: &MixedProfile,
    player: usize,
    strategy: usize,
) -> Rat {
    let d = game.num_players();
    let prefix = prize_prefix(&game.effective_prizes());
    let supports: Vec<Vec<usize>> = (0..d)
        .map(|k| {
            if k == player {
                vec![strategy]
            } else {
                profile.support(k)
            }
        })
        .collect();
    let own = game.score(player, strategy);
    let mut idx = vec![0usize; d];
    let mut total = Rat::zero();
    loop {
        let mut prob = Rat::one();
        let mut above = 0;
        let mut tied = 0;
        for k in 0..d {
            if k == player {
                continue;
            }
            let j = supports[k][idx[k]];
            prob *= &profile.rows[k][j];
            let s = game.score(k, j);
            if s > own {
                above += 1;
            } else if s == own {
                tied += 1;
            }
        }
        total += prob * share(&prefix, above, tied);

        let mut k = 0;
        loop {
            if k == d {
                return total - game.cost(player, strategy);
            }
            idx[k] += 1;
            if idx[k] < supports[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Distribution of (number of opponents strictly above, number tied).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieCountDistribution {
    /// `table[h][t]`, zero whenever `h + t` exceeds the opponents folded so far.
    table: Vec<Vec<Rat>>,
    opponents: usize,
}

impl TieCountDistribution {
    pub fn new(capacity: usize) -> Self {
        let mut table = vec![vec![Rat::zero(); capacity + 1]; capacity + 1];
        table[0][0] = Rat::one();
        TieCountDistribution { table, opponents: 0 }
    }

    /// Folds in one opponent who is above, tied or below with the given
    /// probabilities (which sum to one).
    pub fn push(&mut self, above: &Rat, tied: &Rat, below: &Rat) {
        let m = self.opponents;
        assert!(m + 1 < self.table.len(), "TieCountDistribution capacity exceeded");
        for total in (0..=m).rev() {
            for h in (0..=total).rev() {
                let t = total - h;
                let p = std::mem::take(&mut self.table[h][t]);
                if p.is_zero() {
                    continue;
                }
                if !above.is_zero() {
                    self.table[h + 1][t] += &p * above;
                }
                if !tied.is_zero() {
                    self.table[h][t + 1] += &p * tied;
                }
                if !below.is_zero() {
                    self.table[h][t] += &p * below;
                }
            }
        }
        self.opponents += 1;
    }

    pub fn get(&self, above: usize, tied: usize) -> &Rat {
        &self.table[above][tied]
    }

    pub fn opponents(&self) -> usize {
        self.opponents
    }

    /// Expected prize share under this distribution.
    pub fn expected_share(&self, prizes: &[Rat]) -> Rat {
        let prefix = prize_prefix(prizes);
        let mut total = Rat::zero();
        for h in 0..=self.opponents {
            for t in 0..=(self.opponents - h) {
                let p = &self.table[h][t];
                if !p.is_zero() {
                    total += p * &share(&prefix, h, t);
                }
            }
        }
        total
    }

    pub fn total(&self) -> Rat {
        self.table.iter().flatten().sum()
    }
}

/// Expected payoff of `player` for `strategy` through the tie-count fold.
/// Works for any ranking game; opponents are classified against the score of
/// `strategy`.
pub fn expected_payoff_counts(
    game: &RankingGame,
    profile: &MixedProfile,
    player: usize,
    strategy: usize,
) -> Rat {
    let d = game.num_players();
    let own = game.score(player, strategy);
    let mut dist = TieCountDistribution::new(d.saturating_sub(1));
    for k in (0..d).filter(|&k| k != player) {
        let mut above = Rat::zero();
        let mut tied = Rat::zero();
        let mut below = Rat::zero();
        for (j, p) in profile.rows[k].iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            match game.score(k, j).cmp(own) {
                std::cmp::Ordering::Greater => above += p,
                std::cmp::Ordering::Equal => tied += p,
                std::cmp::Ordering::Less => below += p,
            }
        }
        dist.push(&above, &tied, &below);
    }
    dist.expected_share(&game.effective_prizes()) - game.cost(player, strategy)
}

/// Probabilities that `opponent` plays above, at, or below ladder rung `j`.
fn ladder_split(row: &[Rat], j: usize) -> (Rat, Rat, Rat) {
    let below: Rat = row[..j].iter().sum();
    let above: Rat = row[j + 1..].iter().sum();
    (above, row[j].clone(), below)
}

/// Expected payoff in a score-symmetric game, from the above/tied/below
/// probabilities of each opponent relative to rung `strategy`.
pub fn expected_payoff_anonymous(
    game: &ScoreSymmetricGame,
    profile: &MixedProfile,
    player: usize,
    strategy: usize,
) -> Rat {
    let d = game.num_players();
    let mut dist = TieCountDistribution::new(d.saturating_sub(1));
    for k in (0..d).filter(|&k| k != player) {
        let (above, tied, below) = ladder_split(&profile.rows[k], strategy);
        dist.push(&above, &tied, &below);
    }
    dist.expected_share(&game.effective_prizes()) - &game.costs[player][strategy]
}

/// How expected payoffs are evaluated by [`verify_ranking`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PayoffPath {
    Enumerate,
    Counts,
    /// Enumerate when the opponent profile space is small, otherwise fold counts.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Welfare {
    pub cost: Rat,
    pub score: Rat,
}

/// Exact regret certificate for a mixed profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub profile: Vec<Vec<Rat>>,
    /// Smallest ε for which the profile is an ε-well-supported equilibrium.
    pub epsilon: Rat,
    /// Per player: best pure payoff minus the worst payoff in the support.
    pub regrets: Vec<Rat>,
    /// Per player: best pure payoff minus the expected payoff actually earned.
    pub gaps: Vec<Rat>,
    /// Per player: expected payoff under the profile.
    pub values: Vec<Rat>,
    pub welfare: Welfare,
    #[serde(skip, default)]
    pub payoffs: Vec<Vec<Rat>>,
}

impl EquilibriumCertificate {
    pub fn is_exact_equilibrium(&self) -> bool {
        self.epsilon.is_zero()
    }

    pub fn passes(&self, epsilon: &Rat) -> bool {
        self.epsilon <= *epsilon
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    fn from_payoffs(profile: &MixedProfile, payoffs: Vec<Vec<Rat>>, welfare: Welfare) -> Self {
        let mut regrets = Vec::with_capacity(payoffs.len());
        let mut gaps = Vec::with_capacity(payoffs.len());
        let mut values = Vec::with_capacity(payoffs.len());
        for (row, pi) in profile.rows.iter().zip(&payoffs) {
            let best = pi.iter().max().cloned().unwrap_or_else(Rat::zero);
            let worst_supported = row
                .iter()
                .zip(pi)
                .filter(|(p, _)| p.is_positive())
                .map(|(_, v)| v)
                .min()
                .cloned()
                .unwrap_or_else(|| best.clone());
            let value: Rat = row.iter().zip(pi).map(|(p, v)| p * v).sum();
            regrets.push((&best - &worst_supported).max(Rat::zero()));
            gaps.push((&best - &value).max(Rat::zero()));
            values.push(value);
        }
        let epsilon = regrets.iter().max().cloned().unwrap_or_else(Rat::zero);
        EquilibriumCertificate {
            profile: profile.rows.clone(),
            epsilon,
            regrets,
            gaps,
            values,
            welfare,
            payoffs,
        }
    }
}

/// Certifies `profile` on a ranking game.
pub fn verify_ranking(
    game: &RankingGame,
    profile: &MixedProfile,
    path: PayoffPath,
) -> Result<EquilibriumCertificate> {
    game.check_profile(profile)?;
    let d = game.num_players();
    let path = match path {
        PayoffPath::Auto => {
            let space: f64 = profile.rows.iter().map(|r| r.len() as f64).product();
            if space <= 4096.0 {
                PayoffPath::Enumerate
            } else {
                PayoffPath::Counts
            }
        }
        p => p,
    };
    let payoffs = (0..d)
        .map(|i| {
            (0..game.num_strategies(i))
                .map(|j| match path {
                    PayoffPath::Enumerate => expected_payoff_enum(game, profile, i, j),
                    _ => expected_payoff_counts(game, profile, i, j),
                })
                .collect()
        })
        .collect();
    let mut cost = Rat::zero();
    let mut score = Rat::zero();
    for (i, row) in profile.rows.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            if p.is_positive() {
                cost += p * game.cost(i, j);
                score += p * game.score(i, j);
            }
        }
    }
    Ok(EquilibriumCertificate::from_payoffs(
        profile,
        payoffs,
        Welfare { cost, score },
    ))
}

pub fn verify(game: &RankingGame, profile: &MixedProfile) -> Result<EquilibriumCertificate> {
    verify_ranking(game, profile, PayoffPath::Auto)
}

/// Certifies `profile` on a score-symmetric game through the anonymous fold.
pub fn verify_symmetric(
    game: &ScoreSymmetricGame,
    profile: &MixedProfile,
) -> Result<EquilibriumCertificate> {
    game.to_ranking().check_profile(profile)?;
    let d = game.num_players();
    let n = game.num_strategies();
    let payoffs = (0..d)
        .map(|i| {
            (0..n)
                .map(|j| expected_payoff_anonymous(game, profile, i, j))
                .collect()
        })
        .collect();
    let mut cost = Rat::zero();
    let mut score = Rat::zero();
    for (i, row) in profile.rows.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            if p.is_positive() {
                cost += p * &game.costs[i][j];
                score += p * &game.scores[j];
            }
        }
    }
    Ok(EquilibriumCertificate::from_payoffs(
        profile,
        payoffs,
        Welfare { cost, score },
    ))
}
