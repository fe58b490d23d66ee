mod common;

use common::*;
use rankgame::approx::{epsilon_round, fptas_replay, fptas_solve, ptas_solve};
use rankgame::exact::{cascade_solve, solve_linear_prize, solve_two_player_no_ties, CascadeOutcome, SupportSpec};
use rankgame::gen::{PrizeModel, TiePolicy};
use rankgame::oracle::{brute_force_two_player, cascade_supports};
use rankgame::reductions::{lift_back, score_symmetrize};
use rankgame::{normalize, verify, MixedProfile, RankingGame, Rat};

/// Exactly one player earns a positive payoff, it owns the strongest action
/// costing less than the prize range, and everyone else earns exactly zero.
fn single_winner(game: &RankingGame, profile: &MixedProfile) -> Result<(), String> {
    let (norm, rec) = normalize(game).map_err(|e| e.to_string())?;
    let restricted = rec.restrict_profile(profile).ok_or("mass on a removed strategy")?;
    let cert = verify(&norm, &restricted).map_err(|e| e.to_string())?;
    if !cert.is_exact_equilibrium() {
        return Err(format!("epsilon {}", cert.epsilon));
    }
    let owner = (0..norm.num_players())
        .flat_map(|i| (0..norm.num_strategies(i)).map(move |j| (i, j)))
        .filter(|&(i, j)| norm.cost(i, j) < &Rat::one())
        .max_by(|a, b| norm.score(a.0, a.1).cmp(norm.score(b.0, b.1)))
        .map(|(i, _)| i)
        .unwrap();
    for (i, v) in cert.values.iter().enumerate() {
        let ok = if i == owner { v.is_positive() } else { v.is_zero() };
        if !ok {
            return Err(format!("player {i} earns {v}, strongest owner is {owner}"));
        }
    }
    Ok(())
}

#[test]
fn two_player_solver_single_winner() {
    for seed in 0..40 {
        let g = game(2, 1 + seed as usize % 6, seed, TiePolicy::Forbid, PrizeModel::Single);
        let p = solve_two_player_no_ties(&g).unwrap();
        single_winner(&g, &p).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let all = brute_force_two_player(&g).unwrap();
        assert!(all.contains(&p), "seed {seed}");
        for q in &all {
            single_winner(&g, q).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        }
    }
}

#[test]
fn cascade_single_winner_three_players() {
    for seed in 0..20 {
        let g = game(3, 2 + seed as usize % 2, seed, TiePolicy::Forbid, PrizeModel::Single);
        let found = cascade_supports(&g).unwrap();
        assert!(!found.is_empty(), "seed {seed}");
        for (_, p) in &found {
            single_winner(&g, p).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        }
    }
}

#[test]
fn cascade_matches_two_player_solver() {
    for seed in 0..20 {
        let g = game(2, 2 + seed as usize % 3, seed, TiePolicy::Forbid, PrizeModel::Single);
        let p = solve_two_player_no_ties(&g).unwrap();
        let spec = SupportSpec::of_profile(&p);
        assert_eq!(cascade_solve(&g, &spec).unwrap(), CascadeOutcome::Equilibrium(p));
    }
}

#[test]
fn linear_prize_equilibria_are_exact() {
    for seed in 0..10 {
        let g = game(3, 1 + seed as usize % 3, seed, TiePolicy::Forbid, PrizeModel::Linear);
        let p = solve_linear_prize(&g).unwrap();
        assert!(verify(&g, &p).unwrap().is_exact_equilibrium(), "seed {seed}");
    }
}

#[test]
fn symmetrization_round_trip() {
    for seed in 0..20 {
        let g = game(2, 1 + seed as usize % 3, seed, TiePolicy::Allow, PrizeModel::Single);
        let (sym, map) = score_symmetrize(&g).unwrap();
        let all = brute_force_two_player(&sym.to_ranking()).unwrap();
        assert!(!all.is_empty());
        for p in &all {
            let lifted = lift_back(p, &map, &g);
            assert!(verify(&g, &lifted).unwrap().is_exact_equilibrium(), "seed {seed}");
        }
    }
}

#[test]
fn rounded_exact_equilibria_pass_the_filters() {
    let eps = r("1/4");
    for seed in 0..15 {
        let g = symmetric_game(2, 2 + seed as usize % 3, seed, PrizeModel::Single);
        for p in brute_force_two_player(&g.to_ranking()).unwrap() {
            let m = 576;
            let path: Vec<Vec<u64>> = p
                .rows
                .iter()
                .map(|row| {
                    epsilon_round(row, &Rat::new(1, m))
                        .unwrap()
                        .iter()
                        .map(|v| (v * &Rat::from_int(m)).to_f64() as u64)
                        .collect()
                })
                .collect();
            assert_eq!(fptas_replay(&g, &eps, m as u64, &path), Ok(()), "seed {seed}");
        }
    }
}

#[test]
fn approximation_schemes_are_deterministic() {
    let g = symmetric_game(3, 3, 4, PrizeModel::RandomNonIncreasing);
    let a = fptas_solve(&g, &r("1/4"), Some(&r("1/20"))).unwrap();
    let b = fptas_solve(&g, &r("1/4"), Some(&r("1/20"))).unwrap();
    assert_eq!(a.path, b.path);
    assert_eq!(a.stats, b.stats);
    let a = ptas_solve(&g, &r("1/2")).unwrap();
    let b = ptas_solve(&g, &r("1/2")).unwrap();
    assert_eq!(a.profile, b.profile);
    assert_eq!(a.candidates_checked, b.candidates_checked);
}
