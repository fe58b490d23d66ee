//! Brute-force references: exhaustive support enumeration, the symmetric mixed
//! equilibrium of binary single-prize games, and grid search over small games.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{cascade_solve, payoff_table, solve_support_pair_with, CascadeOutcome, SupportSpec};
use crate::game::{normalize, MixedProfile, RankingGame, ScoreSymmetricGame};
use crate::payoff::{expected_payoff_anonymous, verify, EquilibriumCertificate};
use crate::rat::{grid, Rat};

const MAX_BRUTE_STRATEGIES: usize = 16;

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&j| mask >> j & 1 == 1).collect())
        .collect()
}

/// Every exact equilibrium reachable from some support pair, in order of
/// ascending total support size, then lexicographic supports. Degenerate
/// games contribute one extreme point per support pair.
pub fn brute_force_two_player(game: &RankingGame) -> Result<Vec<MixedProfile>> {
    if game.num_players() != 2 {
        return Err(Error::Precondition("two players required".into()));
    }
    let counts = game.strategy_counts();
    if counts.iter().any(|&n| n > MAX_BRUTE_STRATEGIES) {
        return Err(Error::Precondition(format!(
            "support enumeration is limited to {MAX_BRUTE_STRATEGIES} strategies per player"
        )));
    }
    let s1 = subsets(counts[0]);
    let s2 = subsets(counts[1]);
    let mut pairs: Vec<(&Vec<usize>, &Vec<usize>)> =
        s1.iter().flat_map(|a| s2.iter().map(move |b| (a, b))).collect();
    pairs.sort_by(|x, y| {
        (x.0.len() + x.1.len())
            .cmp(&(y.0.len() + y.1.len()))
            .then_with(|| x.0.cmp(y.0))
            .then_with(|| x.1.cmp(y.1))
    });
    let table = payoff_table(game);
    let found: Vec<MixedProfile> = pairs
        .par_iter()
        .filter_map(|(a, b)| solve_support_pair_with(game, &table, a, b))
        .collect();
    let mut unique: Vec<MixedProfile> = Vec::new();
    for p in found {
        if !unique.contains(&p) {
            unique.push(p);
        }
    }
    Ok(unique)
}

const MAX_CASCADE_SUPPORTS: u128 = 1 << 20;

/// Runs the cascade on every combination of supports drawn from each player's
/// strategies that cost less than the prize range, and returns the accepted
/// ones in enumeration order (player 0 most significant, subsets by bitmask).
pub fn cascade_supports(game: &RankingGame) -> Result<Vec<(SupportSpec, MixedProfile)>> {
    if game.has_ties() || !game.is_single_prize() {
        return Err(Error::Precondition(
            "the cascade needs distinct scores and a single prize".into(),
        ));
    }
    let (norm, record) = normalize(game)?;
    let affordable: Vec<Vec<usize>> = (0..norm.num_players())
        .map(|i| {
            (0..norm.num_strategies(i))
                .filter(|&j| norm.cost(i, j) < &Rat::one())
                .map(|j| record.kept[i][j])
                .collect()
        })
        .collect();
    let total = affordable
        .iter()
        .try_fold(1u128, |acc, a| acc.checked_mul((1u128 << a.len()) - 1))
        .filter(|&t| t <= MAX_CASCADE_SUPPORTS)
        .ok_or_else(|| Error::Precondition("too many support combinations to enumerate".into()))?;
    if total == 0 {
        return Ok(Vec::new());
    }
    let per_player: Vec<Vec<Vec<usize>>> = affordable
        .iter()
        .map(|a| subsets(a.len()).into_iter().map(|s| s.into_iter().map(|k| a[k]).collect()).collect())
        .collect();
    let found: Vec<Option<(SupportSpec, MixedProfile)>> = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut sets = vec![Vec::new(); per_player.len()];
            for (i, options) in per_player.iter().enumerate().rev() {
                let n = options.len() as u128;
                sets[i] = options[(code % n) as usize].clone();
                code /= n;
            }
            let spec = SupportSpec::new(sets).ok()?;
            match cascade_solve(game, &spec).ok()? {
                CascadeOutcome::Equilibrium(p) => Some((spec, p)),
                CascadeOutcome::Rejected(_) => None,
            }
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// Result of the symmetric indifference search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricMixed {
    /// Probability of the strong action.
    pub p: Rat,
    /// Gain of the strong action over the weak one at `p`, from the tie-count fold.
    pub gap: Rat,
    /// Every `p` is indifferent; `p` is then an arbitrary representative.
    pub degenerate: bool,
}

/// The `d`-player game with a free weak action, a strong action of cost `c`
/// and a single unit prize.
pub fn binary_single_prize_game(d: usize, c: &Rat) -> ScoreSymmetricGame {
    let mut prizes = vec![Rat::zero(); d];
    prizes[0] = Rat::one();
    ScoreSymmetricGame::new(
        vec![Rat::one(), Rat::from_int(2)],
        vec![vec![Rat::zero(), c.clone()]; d],
        prizes,
    )
    .expect("binary game is well formed")
}

/// Strong-minus-weak payoff when every opponent plays strong with probability `p`.
pub fn binary_gap(game: &ScoreSymmetricGame, p: &Rat) -> Rat {
    let row = vec![Rat::one() - p, p.clone()];
    let profile = MixedProfile { rows: vec![row; game.num_players()] };
    expected_payoff_anonymous(game, &profile, 0, 1) - expected_payoff_anonymous(game, &profile, 0, 0)
}

/// Closed form of [`binary_gap`] for the single-prize binary game.
fn binary_gap_closed(d: usize, c: &Rat, p: &Rat) -> Rat {
    let q = Rat::one() - p;
    let dd = Rat::from_int(d as i64);
    let weak = q.pow(d as u32 - 1) / &dd;
    let strong = if p.is_zero() {
        Rat::one()
    } else {
        (Rat::one() - q.pow(d as u32)) / (&dd * p)
    };
    strong - weak - c
}

/// Simplest fraction in `[lo, hi]`, by continued fractions.
fn simplest_between(lo: &Rat, hi: &Rat) -> Rat {
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if fl < hi.floor() {
        return fl + Rat::one();
    }
    let inner = simplest_between(
        &(hi - &fl).recip().expect("hi above floor"),
        &(lo - &fl).recip().expect("lo above floor"),
    );
    fl + inner.recip().expect("positive")
}

/// Bisects for the symmetric mixed equilibrium of the binary single-prize game
/// until the gap is within `tolerance`. The indifference gap is decreasing in
/// `p`; an interior root exists exactly when `1/d < c < 1 - 1/d`.
pub fn symmetric_binary_mixed(d: usize, c: &Rat, tolerance: &Rat) -> Result<SymmetricMixed> {
    if d < 2 {
        return Err(Error::Precondition("at least two players required".into()));
    }
    let dd = Rat::from_int(d as i64);
    let inv = Rat::one() / &dd;
    if !(c > &inv && c < &Rat::one()) && !(d == 2 && c == &inv) {
        return Err(Error::Precondition(format!("cost {c} outside (1/{d}, 1)")));
    }
    let game = binary_single_prize_game(d, c);
    if d == 2 && c == &inv {
        let p = Rat::new(1, 2);
        let gap = binary_gap(&game, &p);
        return Ok(SymmetricMixed { p, gap, degenerate: true });
    }
    if c >= &(Rat::one() - &inv) {
        return Err(Error::Precondition(format!(
            "no interior indifference point for cost {c}: everyone playing the weak action is an equilibrium"
        )));
    }
    let within = |p: &Rat| binary_gap_closed(d, c, p).abs() <= *tolerance;
    let mut lo = Rat::zero();
    let mut hi = Rat::one();
    while !(within(&lo) && within(&hi)) {
        let mid = (&lo + &hi) / Rat::from_int(2);
        if binary_gap_closed(d, c, &mid).is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = simplest_between(&lo, &hi);
    let gap = binary_gap(&game, &p);
    Ok(SymmetricMixed { p, gap, degenerate: false })
}

/// Probability vectors of length `n` on the `1/m` grid, lexicographically
/// ascending in their numerators.
pub fn grid_vectors(n: usize, m: u64) -> Vec<Vec<u64>> {
    fn rec(n: usize, left: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if n == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(n - 1, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, m, &mut Vec::with_capacity(n), &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct GridSearchResult {
    pub profile: MixedProfile,
    pub certificate: EquilibriumCertificate,
    /// Whether the best certified epsilon is within the requested threshold.
    pub within: bool,
    pub profiles_scored: usize,
}

/// Scores every profile whose probabilities are multiples of `delta` and
/// returns the smallest certified epsilon, ties broken lexicographically.
pub fn grid_search_ne(game: &RankingGame, delta: &Rat, epsilon: &Rat) -> Result<GridSearchResult> {
    let m = delta
        .inverse_integer()
        .ok_or_else(|| Error::Precondition(format!("grid step {delta} is not 1/m")))?;
    let per_player: Vec<Vec<Vec<u64>>> = game
        .strategy_counts()
        .iter()
        .map(|&n| grid_vectors(n, m))
        .collect();
    let total: usize = per_player.iter().map(Vec::len).product();
    let decode = |mut index: usize| -> MixedProfile {
        let mut rows = vec![Vec::new(); per_player.len()];
        for (i, options) in per_player.iter().enumerate().rev() {
            let pick = &options[index % options.len()];
            index /= options.len();
            rows[i] = pick.iter().map(|&k| grid(k, m)).collect();
        }
        MixedProfile { rows }
    };
    let best = (0..total)
        .into_par_iter()
        .map(|index| {
            let cert = verify(game, &decode(index)).expect("grid profile matches game");
            (cert, index)
        })
        .reduce_with(|a, b| {
            if (&b.0.epsilon, b.1) < (&a.0.epsilon, a.1) {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| Error::Precondition("game has no profiles".into()))?;
    let (certificate, index) = best;
    Ok(GridSearchResult {
        profile: decode(index),
        within: certificate.epsilon <= *epsilon,
        certificate,
        profiles_scored: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::{example_one, player, r, three_action};

    #[test]
    fn cascade_supports_find_known_equilibria() {
        let found = cascade_supports(&example_one()).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].1, MixedProfile::uniform(&[2, 2]));
        let g = RankingGame::new(
            vec![player(&[("0", "1"), ("1/2", "3")]), player(&[("0", "2"), ("1/4", "4")])],
            vec![r("1"), r("0")],
        );
        let found = cascade_supports(&g).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].1.rows, vec![vec![r("3/4"), r("1/4")], vec![r("1/2"), r("1/2")]]);
        assert!(cascade_supports(&three_action()).is_err());
    }

    #[test]
    fn example_one_has_one_equilibrium() {
        let all = brute_force_two_player(&example_one()).unwrap();
        assert_eq!(all, vec![MixedProfile::uniform(&[2, 2])]);
    }

    #[test]
    fn three_action_unique() {
        let all = brute_force_two_player(&three_action()).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].rows[0], vec![r("2/3"), r("0"), r("1/3")]);
        assert_eq!(all[0].rows[1], vec![r("2/5"), r("3/5"), r("0")]);
    }

    #[test]
    fn binary_three_players() {
        let s = symmetric_binary_mixed(3, &r("1/2"), &r("1/1000000000")).unwrap();
        assert_eq!(s.p, r("1/2"));
        assert!(s.gap.is_zero());
        assert!(!s.degenerate);
        let g = binary_single_prize_game(3, &r("1/2"));
        assert_eq!(binary_gap(&g, &r("1/4")), r("1/6") - r("1/12"));
    }

    #[test]
    fn binary_two_players_degenerate() {
        let s = symmetric_binary_mixed(2, &r("1/2"), &r("1/1000000000")).unwrap();
        assert!(s.degenerate);
        let g = binary_single_prize_game(2, &r("1/2"));
        for p in ["0", "1/3", "1"] {
            assert!(binary_gap(&g, &r(p)).is_zero());
        }
    }

    #[test]
    fn binary_out_of_range() {
        assert!(symmetric_binary_mixed(3, &r("1/4"), &r("1/1000")).is_err());
        assert!(symmetric_binary_mixed(3, &r("1"), &r("1/1000")).is_err());
        assert!(symmetric_binary_mixed(3, &r("5/6"), &r("1/1000")).is_err());
    }

    #[test]
    fn binary_ten_players() {
        let tol = r("1/1000000000");
        let s = symmetric_binary_mixed(10, &r("1/5"), &tol).unwrap();
        assert!(s.gap.abs() <= tol);
        assert!(s.p.is_positive() && s.p < Rat::one());
    }

    #[test]
    fn closed_form_agrees_with_fold() {
        for d in 2..7 {
            let c = r("1/3");
            let g = binary_single_prize_game(d, &c);
            for p in ["0", "1/5", "1/2", "9/10", "1"] {
                assert_eq!(binary_gap(&g, &r(p)), binary_gap_closed(d, &c, &r(p)));
            }
        }
    }

    #[test]
    fn simplest_fraction() {
        assert_eq!(simplest_between(&r("1/3"), &r("1/2")), r("1/2"));
        assert_eq!(simplest_between(&r("3/10"), &r("7/20")), r("1/3"));
        assert_eq!(simplest_between(&r("5/4"), &r("7/4")), r("3/2"));
    }

    #[test]
    fn grid_search_example_one() {
        let g = example_one();
        let res = grid_search_ne(&g, &r("1/4"), &r("0")).unwrap();
        assert_eq!(res.profile, MixedProfile::uniform(&[2, 2]));
        assert!(res.within);
        assert_eq!(res.profiles_scored, 25);
        let pure = grid_search_ne(&g, &r("1"), &r("0")).unwrap();
        assert!(pure.certificate.epsilon.is_positive());
        assert_eq!(pure.profiles_scored, 4);
    }

    #[test]
    fn grid_vector_order() {
        assert_eq!(grid_vectors(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(grid_vectors(3, 1).len(), 3);
    }
}
