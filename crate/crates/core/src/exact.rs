//! Exact equilibrium algorithms: threshold pure equilibria of two-action
//! score-symmetric games, two-player games without ties, the support cascade
//! for single-prize games and the linear-prize LP.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{normalize, MixedProfile, RankingGame, ScoreSymmetricGame};
use crate::lp::{solve_lp, solve_system, LinearProgram, LinearSystem, Relation, Sense, SystemSolution};
use crate::payoff::{pure_payoffs, verify};
use crate::rat::Rat;
use crate::reductions::build_polymatrix;

/// Per player, the strategy indices allowed positive probability.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupportSpec {
    pub sets: Vec<Vec<usize>>,
}

impl SupportSpec {
    /// Sorts and deduplicates each set; every set must be non-empty.
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut sets = sets;
        for (i, s) in sets.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::Malformed(format!("player {i} has an empty support")));
            }
        }
        Ok(SupportSpec { sets })
    }

    /// Parses `0,1;2` style text: players separated by `;`, indices by `,`.
    pub fn parse(text: &str) -> Result<Self> {
        let sets = text
            .split(';')
            .map(|part| {
                part.split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| Error::Malformed(format!("bad support index {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SupportSpec::new(sets)
    }

    pub fn of_profile(profile: &MixedProfile) -> Self {
        SupportSpec {
            sets: (0..profile.num_players()).map(|i| profile.support(i)).collect(),
        }
    }

    fn check(&self, game: &RankingGame) -> Result<()> {
        if self.sets.len() != game.num_players() {
            return Err(Error::DimensionMismatch(format!(
                "{} supports for {} players",
                self.sets.len(),
                game.num_players()
            )));
        }
        for (i, s) in self.sets.iter().enumerate() {
            if let Some(&j) = s.iter().find(|&&j| j >= game.num_strategies(i)) {
                return Err(Error::DimensionMismatch(format!(
                    "player {i} has no strategy {j}"
                )));
            }
        }
        Ok(())
    }
}

/// The profile in which the first `cutoff` players of `order` play the
/// stronger action and everyone else the weaker one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdProfile {
    pub order: Vec<usize>,
    pub cutoff: usize,
}

impl ThresholdProfile {
    pub fn to_profile(&self) -> MixedProfile {
        let mut choice = vec![0; self.order.len()];
        for &i in &self.order[..self.cutoff] {
            choice[i] = 1;
        }
        MixedProfile::pure(&choice, &vec![2; self.order.len()])
    }
}

/// Pure equilibrium of a two-action score-symmetric game by the threshold scan.
pub fn solve_pure_two_action(game: &ScoreSymmetricGame) -> Result<ThresholdProfile> {
    if game.num_strategies() != 2 {
        return Err(Error::Precondition(format!(
            "threshold scan needs two actions, game has {}",
            game.num_strategies()
        )));
    }
    let d = game.num_players();
    let u = game.effective_prizes();
    let mut prefix = Vec::with_capacity(d + 1);
    prefix.push(Rat::zero());
    for x in &u {
        let next = prefix.last().unwrap() + x;
        prefix.push(next);
    }
    let delta: Vec<Rat> = game.costs.iter().map(|c| &c[1] - &c[0]).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| delta[a].cmp(&delta[b]));

    // With k players on the strong action: a weak player shares ranks k+1..d,
    // a player joining the strong group shares ranks 1..k+1.
    let weak_share = |k: usize| (&prefix[d] - &prefix[k]) / Rat::from_int((d - k) as i64);
    let strong_share = |k: usize| &prefix[k + 1] / &Rat::from_int(k as i64 + 1);

    let mut cutoff = 0;
    while cutoff < d {
        let mover = order[cutoff];
        let gain = &strong_share(cutoff) - &delta[mover];
        if gain <= weak_share(cutoff) {
            break;
        }
        cutoff += 1;
        // No strong player wants to fall back; checking the most expensive one suffices.
        let costliest = &delta[order[cutoff - 1]];
        assert!(&strong_share(cutoff - 1) - costliest >= weak_share(cutoff - 1));
    }
    Ok(ThresholdProfile { order, cutoff })
}

/// Pure payoff pairs of a two-player game, indexed `[a][b]`.
pub(crate) fn payoff_table(game: &RankingGame) -> Vec<Vec<[Rat; 2]>> {
    (0..game.num_strategies(0))
        .map(|a| {
            (0..game.num_strategies(1))
                .map(|b| {
                    let mut p = pure_payoffs(game, &[a, b]).into_iter();
                    [p.next().unwrap(), p.next().unwrap()]
                })
                .collect()
        })
        .collect()
}

/// Solves the indifference conditions for a given support pair of a
/// two-player game. Returns the profile if it is an exact equilibrium.
pub fn solve_support_pair(game: &RankingGame, s1: &[usize], s2: &[usize]) -> Option<MixedProfile> {
    solve_support_pair_with(game, &payoff_table(game), s1, s2)
}

pub(crate) fn solve_support_pair_with(
    game: &RankingGame,
    table: &[Vec<[Rat; 2]>],
    s1: &[usize],
    s2: &[usize],
) -> Option<MixedProfile> {
    let n1 = game.num_strategies(0);
    let n2 = game.num_strategies(1);
    // y mixes over s2 so that player 0 is indifferent on s1 and no better off elsewhere.
    let y = opponent_mix(n1, s1, s2, |a, b| table[a][b][0].clone())?;
    let x = opponent_mix(n2, s2, s1, |b, a| table[a][b][1].clone())?;
    let mut rows = vec![vec![Rat::zero(); n1], vec![Rat::zero(); n2]];
    for (&a, p) in s1.iter().zip(x) {
        rows[0][a] = p;
    }
    for (&b, p) in s2.iter().zip(y) {
        rows[1][b] = p;
    }
    let profile = MixedProfile::new(rows).ok()?;
    verify(game, &profile)
        .ok()
        .filter(|c| c.is_exact_equilibrium())
        .map(|_| profile)
}

/// Mix over `theirs` making every strategy in `mine` a best response among
/// `own_count` strategies; `pay(mine, theirs)` is the own payoff.
fn opponent_mix(
    own_count: usize,
    mine: &[usize],
    theirs: &[usize],
    pay: impl Fn(usize, usize) -> Rat,
) -> Option<Vec<Rat>> {
    let m = theirs.len();
    // Unknowns: y over `theirs`, then the common value v.
    let mut matrix = Vec::with_capacity(mine.len() + 1);
    let mut rhs = Vec::with_capacity(mine.len() + 1);
    for &a in mine {
        let mut row: Vec<Rat> = theirs.iter().map(|&b| pay(a, b)).collect();
        row.push(-Rat::one());
        matrix.push(row);
        rhs.push(Rat::zero());
    }
    let mut total = vec![Rat::one(); m];
    total.push(Rat::zero());
    matrix.push(total);
    rhs.push(Rat::one());
    match solve_system(&LinearSystem::new(matrix.clone(), rhs.clone())) {
        SystemSolution::Inconsistent => None,
        SystemSolution::Unique(sol) => {
            let y = sol[..m].to_vec();
            (!y.iter().any(Rat::is_negative)).then_some(y)
        }
        SystemSolution::Underdetermined(_) => {
            let mut lp = LinearProgram::new(m + 1, Sense::Minimize);
            lp.free(m);
            for (row, b) in matrix.into_iter().zip(rhs) {
                lp.add_constraint(row, Relation::Eq, b);
            }
            for a in (0..own_count).filter(|a| !mine.contains(a)) {
                let mut row: Vec<Rat> = theirs.iter().map(|&b| pay(a, b)).collect();
                row.push(-Rat::one());
                lp.add_constraint(row, Relation::Le, Rat::zero());
            }
            solve_lp(&lp).optimal().map(|(_, point)| point[..m].to_vec())
        }
    }
}

/// Exact equilibrium of a two-player game in which all scores are distinct.
pub fn solve_two_player_no_ties(game: &RankingGame) -> Result<MixedProfile> {
    if game.num_players() != 2 {
        return Err(Error::Precondition("two players required".into()));
    }
    if game.has_ties() {
        return Err(Error::Precondition(
            "scores must be distinct across players".into(),
        ));
    }
    let (norm, record) = normalize(game)?;
    let alive = eliminate_same_win_set(&norm);
    let candidates = |i: usize| -> Vec<Vec<usize>> {
        let orig: Vec<usize> = alive[i].iter().map(|&j| record.kept[i][j]).collect();
        let mut out: Vec<Vec<usize>> = (1..=orig.len()).map(|k| orig[..k].to_vec()).collect();
        out.extend((2..=orig.len()).map(|k| orig[1..k].to_vec()));
        out
    };
    let c1 = candidates(0);
    let c2 = candidates(1);
    let mut pairs: Vec<(&Vec<usize>, &Vec<usize>)> =
        c1.iter().flat_map(|a| c2.iter().map(move |b| (a, b))).collect();
    pairs.sort_by(|x, y| {
        (x.0.len() + x.1.len())
            .cmp(&(y.0.len() + y.1.len()))
            .then_with(|| x.0.cmp(y.0))
            .then_with(|| x.1.cmp(y.1))
    });
    let table = payoff_table(game);
    pairs
        .par_iter()
        .find_map_first(|(a, b)| solve_support_pair_with(game, &table, a, b))
        .ok_or_else(|| Error::Internal("no prefix support pair yields an equilibrium".into()))
}

/// Repeatedly drops a strategy that wins against exactly the same opponent
/// strategies as the next weaker one. Returns surviving indices per player.
fn eliminate_same_win_set(game: &RankingGame) -> Vec<Vec<usize>> {
    let mut alive: Vec<Vec<usize>> = (0..2).map(|i| (0..game.num_strategies(i)).collect()).collect();
    loop {
        let mut changed = false;
        for i in 0..2 {
            let other = 1 - i;
            let mut k = 1;
            while k < alive[i].len() {
                let lo = game.score(i, alive[i][k - 1]);
                let hi = game.score(i, alive[i][k]);
                let between = alive[other]
                    .iter()
                    .any(|&l| game.score(other, l) > lo && game.score(other, l) < hi);
                if between {
                    k += 1;
                } else {
                    alive[i].remove(k);
                    changed = true;
                }
            }
        }
        if !changed {
            return alive;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    /// A support strategy costs more than the prize range.
    Unaffordable { player: usize, strategy: usize },
    /// One player owns two support actions with nothing in between.
    ConsecutiveOwner { player: usize },
    /// Opponents above an action already exhaust their mass.
    ZeroProduct { rank: usize },
    OutOfRange { player: usize, strategy: usize, value: Rat },
    /// An action after a closed row does not earn its owner's payoff.
    Indifference { rank: usize },
    /// The computed profile has a profitable deviation.
    NotEquilibrium { epsilon: Rat },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CascadeOutcome {
    Equilibrium(MixedProfile),
    Rejected(Rejection),
}

/// Computes the only candidate equilibrium with the given support of a
/// single-prize game without ties, strongest action first.
pub fn cascade_solve(game: &RankingGame, support: &SupportSpec) -> Result<CascadeOutcome> {
    support.check(game)?;
    if game.has_ties() {
        return Err(Error::Precondition("scores must be distinct across players".into()));
    }
    if !game.is_single_prize() {
        return Err(Error::Precondition("single prize required".into()));
    }
    let (norm, record) = normalize(game)?;
    let d = norm.num_players();
    let mut actions = Vec::new();
    for (i, set) in support.sets.iter().enumerate() {
        for &orig in set {
            let Some(j) = record.kept[i].iter().position(|&k| k == orig) else {
                return Ok(CascadeOutcome::Rejected(Rejection::Unaffordable {
                    player: i,
                    strategy: orig,
                }));
            };
            if norm.cost(i, j) >= &Rat::one() {
                return Err(Error::Precondition(format!(
                    "support strategy {orig} of player {i} costs the whole prize"
                )));
            }
            actions.push((i, j));
        }
    }
    actions.sort_by(|a, b| norm.score(b.0, b.1).cmp(norm.score(a.0, a.1)));

    let top = actions[0].0;
    let target = |i: usize| {
        if i == top {
            Rat::one() - norm.cost(actions[0].0, actions[0].1)
        } else {
            Rat::zero()
        }
    };
    let mut weakest = vec![0; d];
    for (r, &(owner, _)) in actions.iter().enumerate() {
        weakest[owner] = r;
    }
    let mut rows: Vec<Vec<Rat>> = (0..d).map(|i| vec![Rat::zero(); norm.num_strategies(i)]).collect();
    let mut sigma = vec![Rat::zero(); d];
    for r in 0..actions.len() {
        let (owner, j) = actions[r];
        let closes = weakest[owner] == r;
        let x = if closes {
            Rat::one() - &sigma[owner]
        } else {
            // The next action's owner earns its target:
            // -c + K * (1 - sigma_owner - x) = target
            let (next_owner, next_j) = actions[r + 1];
            if next_owner == owner {
                return Ok(CascadeOutcome::Rejected(Rejection::ConsecutiveOwner { player: owner }));
            }
            let k: Rat = (0..d)
                .filter(|&q| q != owner && q != next_owner)
                .map(|q| Rat::one() - &sigma[q])
                .product();
            if k.is_zero() {
                return Ok(CascadeOutcome::Rejected(Rejection::ZeroProduct { rank: r + 1 }));
            }
            Rat::one() - &sigma[owner] - (target(next_owner) + norm.cost(next_owner, next_j)) / k
        };
        if x.is_negative() || &sigma[owner] + &x > Rat::one() {
            return Ok(CascadeOutcome::Rejected(Rejection::OutOfRange {
                player: owner,
                strategy: record.kept[owner][j],
                value: x,
            }));
        }
        sigma[owner] += &x;
        rows[owner][j] = x;
        if closes && r + 1 < actions.len() {
            let (next_owner, next_j) = actions[r + 1];
            let won: Rat = (0..d)
                .filter(|&q| q != next_owner)
                .map(|q| Rat::one() - &sigma[q])
                .product();
            if won - norm.cost(next_owner, next_j) != target(next_owner) {
                return Ok(CascadeOutcome::Rejected(Rejection::Indifference { rank: r + 1 }));
            }
        }
    }
    let profile = record.lift_profile(&MixedProfile { rows });
    let cert = verify(game, &profile)?;
    if !cert.is_exact_equilibrium() {
        return Ok(CascadeOutcome::Rejected(Rejection::NotEquilibrium { epsilon: cert.epsilon }));
    }
    Ok(CascadeOutcome::Equilibrium(profile))
}

/// Exact equilibrium of a game without ties whose prizes are affine in rank,
/// through the constant-sum polymatrix LP.
pub fn solve_linear_prize(game: &RankingGame) -> Result<MixedProfile> {
    let (a, b) = game
        .linear_prize_coefficients()
        .ok_or_else(|| Error::Precondition("prizes are not affine in rank".into()))?;
    let pm = build_polymatrix(game, &a, &b)?;
    let d = game.num_players();
    let counts = &pm.strategy_counts;
    let mut offsets = Vec::with_capacity(d);
    let mut total = 0;
    for &n in counts {
        offsets.push(total);
        total += n;
    }
    // Variables: every x^i_j, then one bound w_i per player.
    let nvars = total + d;
    let mut lp = LinearProgram::new(nvars, Sense::Minimize);
    let mut objective = vec![Rat::zero(); nvars];
    for i in 0..d {
        objective[total + i] = Rat::one();
        lp.free(total + i);
        // Nature's payoff, the negated nature edges, is part of the constant sum.
        for j in 0..counts[i] {
            objective[offsets[i] + j] = -pm.nature[i][j].clone();
        }
        let mut simplex = vec![Rat::zero(); nvars];
        for j in 0..counts[i] {
            simplex[offsets[i] + j] = Rat::one();
        }
        lp.add_constraint(simplex, Relation::Eq, Rat::one());
    }
    lp.set_objective(objective);
    for i in 0..d {
        for j in 0..counts[i] {
            // w_i - sum_k edges[i][k][j] . x^k >= nature[i][j]
            let mut row = vec![Rat::zero(); nvars];
            row[total + i] = Rat::one();
            for k in (0..d).filter(|&k| k != i) {
                for l in 0..counts[k] {
                    row[offsets[k] + l] = -pm.edges[i][k][j][l].clone();
                }
            }
            lp.add_constraint(row, Relation::Ge, pm.nature[i][j].clone());
        }
    }
    let (_, point) = solve_lp(&lp)
        .optimal()
        .ok_or_else(|| Error::Internal("polymatrix LP has no optimum".into()))?;
    let rows = (0..d)
        .map(|i| point[offsets[i]..offsets[i] + counts[i]].to_vec())
        .collect();
    let profile = MixedProfile::new(rows)?;
    let cert = verify(game, &profile)?;
    if !cert.is_exact_equilibrium() {
        return Err(Error::Internal(format!(
            "polymatrix optimum is not an equilibrium (epsilon {})",
            cert.epsilon
        )));
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::{example_one, player, r};
    use crate::game::StrategySpec;

    fn two_action(costs: &[&str], prizes: &[&str]) -> ScoreSymmetricGame {
        ScoreSymmetricGame::new(
            vec![r("1"), r("2")],
            costs.iter().map(|c| vec![r("0"), r(c)]).collect(),
            prizes.iter().map(|p| r(p)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn threshold_fixtures() {
        let g = two_action(&["9/20"; 4], &["1", "0", "0", "0"]);
        let z = solve_pure_two_action(&g).unwrap();
        assert_eq!(z.cutoff, 2);
        assert!(crate::payoff::verify_symmetric(&g, &z.to_profile()).unwrap().is_exact_equilibrium());
        let g = two_action(&["1/5"; 4], &["1", "0", "0", "0"]);
        assert_eq!(solve_pure_two_action(&g).unwrap().cutoff, 4);
    }

    #[test]
    fn threshold_two_players() {
        let g = two_action(&["7/10", "3/10"], &["1", "0"]);
        let z = solve_pure_two_action(&g).unwrap();
        assert_eq!(z.cutoff, 1);
        assert_eq!(z.order, vec![1, 0]);
        let p = z.to_profile();
        assert_eq!(p.as_pure(), Some(vec![0, 1]));
        assert!(verify(&g.to_ranking(), &p).unwrap().is_exact_equilibrium());
    }

    #[test]
    fn example_one_uniform() {
        let p = solve_two_player_no_ties(&example_one()).unwrap();
        assert_eq!(p, MixedProfile::uniform(&[2, 2]));
    }

    fn cascade_fixture() -> RankingGame {
        RankingGame::new(
            vec![player(&[("0", "1"), ("1/2", "3")]), player(&[("0", "2"), ("1/4", "4")])],
            vec![r("1"), r("0")],
        )
    }

    #[test]
    fn no_ties_hand_computed() {
        let p = solve_two_player_no_ties(&cascade_fixture()).unwrap();
        assert_eq!(p.rows[0], vec![r("3/4"), r("1/4")]);
        assert_eq!(p.rows[1], vec![r("1/2"), r("1/2")]);
    }

    #[test]
    fn cascade_matches_hand_computation() {
        let g = cascade_fixture();
        let s = SupportSpec::new(vec![vec![0, 1], vec![0, 1]]).unwrap();
        match cascade_solve(&g, &s).unwrap() {
            CascadeOutcome::Equilibrium(p) => assert_eq!(p, solve_two_player_no_ties(&g).unwrap()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cascade_rejects_consecutive_owner() {
        let g = RankingGame::new(
            vec![player(&[("0", "1"), ("1/4", "3"), ("1/2", "4")]), player(&[("0", "2")])],
            vec![r("1"), r("0")],
        );
        let s = SupportSpec::new(vec![vec![1, 2], vec![0]]).unwrap();
        assert_eq!(
            cascade_solve(&g, &s).unwrap(),
            CascadeOutcome::Rejected(Rejection::ConsecutiveOwner { player: 0 })
        );
    }

    #[test]
    fn cascade_closes_rows_of_free_actions() {
        // The bottom action of player 2 loses to all of player 0's mass.
        let g = RankingGame::new(
            vec![
                player(&[("0", "4"), ("1/2", "11")]),
                player(&[("0", "3"), ("9/10", "10")]),
                player(&[("0", "2"), ("1/2", "8")]),
            ],
            vec![r("1"), r("0"), r("0")],
        );
        let s = SupportSpec::new(vec![vec![0, 1], vec![0, 1], vec![0]]).unwrap();
        let expected = MixedProfile {
            rows: vec![
                vec![r("9/10"), r("1/10")],
                vec![r("1/2"), r("1/2")],
                vec![r("1"), r("0")],
            ],
        };
        assert_eq!(cascade_solve(&g, &s).unwrap(), CascadeOutcome::Equilibrium(expected));
        let wrong = SupportSpec::new(vec![vec![0, 1], vec![1], vec![0]]).unwrap();
        assert!(matches!(cascade_solve(&g, &wrong).unwrap(), CascadeOutcome::Rejected(_)));
    }

    #[test]
    fn dominated_strategy_is_eliminated() {
        // Player 0's strategies 1 and 2 beat the same opponent set.
        let g = RankingGame::new(
            vec![
                player(&[("0", "1"), ("1/4", "3"), ("1/3", "4")]),
                player(&[("0", "2"), ("1/2", "5")]),
            ],
            vec![r("1"), r("0")],
        );
        let reduced = RankingGame::new(
            vec![player(&[("0", "1"), ("1/4", "3")]), player(&[("0", "2"), ("1/2", "5")])],
            vec![r("1"), r("0")],
        );
        let full = solve_two_player_no_ties(&g).unwrap();
        let small = solve_two_player_no_ties(&reduced).unwrap();
        assert_eq!(full.rows[0][..2], small.rows[0][..]);
        assert!(full.rows[0][2].is_zero());
        assert_eq!(full.rows[1], small.rows[1]);
    }

    #[test]
    fn three_action_support_pair() {
        let g = crate::game::fixtures::three_action();
        let p = solve_support_pair(&g, &[0, 2], &[0, 1]).unwrap();
        assert_eq!(p.rows[0], vec![r("2/3"), r("0"), r("1/3")]);
        assert_eq!(p.rows[1], vec![r("2/5"), r("3/5"), r("0")]);
        assert!(solve_support_pair(&g, &[0], &[0]).is_none());
    }

    #[test]
    fn linear_prize_example_one() {
        let p = solve_linear_prize(&example_one()).unwrap();
        assert_eq!(p, MixedProfile::uniform(&[2, 2]));
    }

    #[test]
    fn linear_prize_three_players() {
        let g = RankingGame::new(
            vec![
                player(&[("0", "1"), ("1/5", "4"), ("1/2", "7")]),
                player(&[("0", "2"), ("1/4", "5"), ("2/5", "8")]),
                player(&[("0", "3"), ("1/10", "6"), ("3/5", "9")]),
            ],
            vec![r("1"), r("1/2"), r("0")],
        );
        let p = solve_linear_prize(&g).unwrap();
        assert!(verify(&g, &p).unwrap().is_exact_equilibrium());
    }

    #[test]
    fn linear_prize_rejects_convex_prizes() {
        let mut g = example_one();
        g.players.push(vec![StrategySpec::new(r("0"), r("7"))]);
        g.prizes = vec![r("1"), r("1/4"), r("0")];
        assert!(matches!(solve_linear_prize(&g), Err(Error::Precondition(_))));
    }

    #[test]
    fn support_parse() {
        let s = SupportSpec::parse("0, 2;1").unwrap();
        assert_eq!(s.sets, vec![vec![0, 2], vec![1]]);
        assert!(SupportSpec::parse("0;").is_err());
        assert!(SupportSpec::parse("x").is_err());
    }
}
