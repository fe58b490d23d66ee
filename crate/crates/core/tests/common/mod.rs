#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankgame::gen::{GeneratorSpec, PrizeModel, TiePolicy};
use rankgame::{normalize, MixedProfile, RankingGame, Rat, ScoreSymmetricGame};

pub fn r(s: &str) -> Rat {
    s.parse().unwrap()
}

/// Random probability vector with denominator at most `den * len`, some entries zero.
pub fn random_row(rng: &mut ChaCha8Rng, len: usize, den: u64) -> Vec<Rat> {
    loop {
        let w: Vec<u64> = (0..len)
            .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=den) })
            .collect();
        let total: u64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&k| Rat::new(k as i64, total as i64)).collect();
        }
    }
}

pub fn random_profile(rng: &mut ChaCha8Rng, counts: &[usize]) -> MixedProfile {
    MixedProfile::new(counts.iter().map(|&n| random_row(rng, n, 7)).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn game(d: usize, n: usize, seed: u64, ties: TiePolicy, prizes: PrizeModel) -> RankingGame {
    GeneratorSpec::new(d, n, seed)
        .with_ties(ties)
        .with_prizes(prizes)
        .generate()
        .unwrap()
}

pub fn symmetric_game(d: usize, n: usize, seed: u64, prizes: PrizeModel) -> ScoreSymmetricGame {
    let g = game(d, n, seed, TiePolicy::ForceSharedLadder, prizes);
    let (g, _) = normalize(&g).unwrap();
    ScoreSymmetricGame::from_ranking(&g).unwrap()
}
