//! Seeded random instances.

use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{RankingGame, StrategySpec};
use crate::rat::{grid, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TiePolicy {
    /// Every score in the game is distinct.
    Forbid,
    /// Scores are drawn per player from a small shared pool, so ties are likely.
    Allow,
    /// All players use one score ladder.
    ForceSharedLadder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrizeModel {
    /// `(1, 0, ..., 0)`.
    Single,
    /// `u_k = (d - k) / (d - 1)`.
    Linear,
    /// `u_1 = 1`, `u_d = 0`, random non-increasing values in between.
    RandomNonIncreasing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub players: usize,
    pub actions: usize,
    pub seed: u64,
    pub tie_policy: TiePolicy,
    pub prize_model: PrizeModel,
    /// Costs and random prizes are multiples of `1 / cost_denominator`.
    pub cost_denominator: u64,
}

impl GeneratorSpec {
    pub fn new(players: usize, actions: usize, seed: u64) -> Self {
        GeneratorSpec {
            players,
            actions,
            seed,
            tie_policy: TiePolicy::Forbid,
            prize_model: PrizeModel::Single,
            cost_denominator: 20,
        }
    }

    pub fn with_ties(mut self, policy: TiePolicy) -> Self {
        self.tie_policy = policy;
        self
    }

    pub fn with_prizes(mut self, model: PrizeModel) -> Self {
        self.prize_model = model;
        self
    }

    pub fn with_cost_denominator(mut self, denominator: u64) -> Self {
        self.cost_denominator = denominator;
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.players < 2 {
            return Err(Error::Precondition(
                "at least two players are needed for u_1 > u_d".into(),
            ));
        }
        if self.actions == 0 {
            return Err(Error::Precondition("at least one action is needed".into()));
        }
        if (self.actions as u64) > self.cost_denominator {
            return Err(Error::Precondition(format!(
                "{} distinct costs below 1 need a denominator above {}",
                self.actions, self.cost_denominator
            )));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<RankingGame> {
        self.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let d = self.players;
        let n = self.actions;
        let den = self.cost_denominator;

        let scores: Vec<Vec<u64>> = match self.tie_policy {
            TiePolicy::Forbid => {
                let mut pool: Vec<u64> = (1..=(2 * d * n) as u64).collect();
                pool.shuffle(&mut rng);
                pool.chunks(n).take(d).map(sorted).collect()
            }
            TiePolicy::Allow => {
                let size = n + n / 2 + 1;
                (0..d)
                    .map(|_| sorted(&sample(&mut rng, size, n).into_iter().map(|k| k as u64 + 1).collect::<Vec<_>>()))
                    .collect()
            }
            TiePolicy::ForceSharedLadder => {
                let ladder = sorted(
                    &sample(&mut rng, 3 * n, n)
                        .into_iter()
                        .map(|k| k as u64 + 1)
                        .collect::<Vec<_>>(),
                );
                vec![ladder; d]
            }
        };

        let players = scores
            .into_iter()
            .map(|row| {
                let mut costs = vec![0u64];
                costs.extend(sorted(
                    &sample(&mut rng, den as usize - 1, n - 1)
                        .into_iter()
                        .map(|k| k as u64 + 1)
                        .collect::<Vec<_>>(),
                ));
                costs
                    .into_iter()
                    .zip(row)
                    .map(|(c, s)| StrategySpec::new(grid(c, den), Rat::from_int(s as i64)))
                    .collect()
            })
            .collect();

        let prizes = match self.prize_model {
            PrizeModel::Single => (0..d)
                .map(|k| if k == 0 { Rat::one() } else { Rat::zero() })
                .collect(),
            PrizeModel::Linear => (0..d)
                .map(|k| grid((d - 1 - k) as u64, (d - 1) as u64))
                .collect(),
            PrizeModel::RandomNonIncreasing => {
                let mut inner: Vec<u64> = (0..d.saturating_sub(2)).map(|_| rng.gen_range(0..=den)).collect();
                inner.sort_unstable_by(|a, b| b.cmp(a));
                let mut prizes = vec![Rat::one()];
                prizes.extend(inner.into_iter().map(|k| grid(k, den)));
                prizes.push(Rat::zero());
                prizes
            }
        };
        Ok(RankingGame::new(players, prizes))
    }
}

fn sorted(values: &[u64]) -> Vec<u64> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v
}
