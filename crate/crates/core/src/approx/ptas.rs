use rayon::prelude::*;

use super::rounding::{inverse_integer_floor, round_costs_down};
use crate::error::{Error, Result};
use crate::game::{MixedProfile, ScoreSymmetricGame};
use crate::oracle::grid_vectors;
use crate::payoff::{verify_symmetric, EquilibriumCertificate};
use crate::rat::{grid, Rat};

/// Players sharing one rounded cost vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeClass {
    pub rounded_costs: Vec<Rat>,
    pub members: Vec<usize>,
}

/// Mixed strategies whose entries are multiples of `1/denominator`, stored as
/// numerators. The first vector is the pure weakest strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyGrid {
    pub denominator: u64,
    pub vectors: Vec<Vec<u64>>,
}

impl StrategyGrid {
    pub fn new(n: usize, denominator: u64) -> Self {
        let mut vectors = grid_vectors(n, denominator);
        vectors.reverse();
        StrategyGrid { denominator, vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn row(&self, index: usize) -> Vec<Rat> {
        self.vectors[index]
            .iter()
            .map(|&k| grid(k, self.denominator))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct PtasResult {
    pub profile: MixedProfile,
    /// Certificate on the input game.
    pub certificate: EquilibriumCertificate,
    /// Certificate on the cost-rounded game, at most `epsilon`.
    pub rounded_certificate: EquilibriumCertificate,
    /// Accuracy actually used, `1/m`.
    pub epsilon: Rat,
    pub types: Vec<TypeClass>,
    pub grid_size: usize,
    pub candidates_total: u128,
    pub candidates_checked: u128,
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of ways to spread the members of every type over `s` grid vectors.
pub fn ptas_candidate_count(type_sizes: &[usize], s: usize) -> Option<u128> {
    type_sizes.iter().try_fold(1u128, |acc, &dt| {
        let c = binomial((dt + s - 1) as u128, (s - 1) as u128)?;
        acc.checked_mul(c)
    })
}

/// Next composition of the same total into the same number of parts, in
/// lexicographically descending order.
fn next_composition(c: &mut [usize]) -> bool {
    let s = c.len();
    let Some(i) = (0..s.saturating_sub(1)).rev().find(|&i| c[i] > 0) else {
        return false;
    };
    let tail: usize = c[i + 1..].iter().sum();
    c[i] -= 1;
    for v in c[i + 1..].iter_mut() {
        *v = 0;
    }
    c[i + 1] = tail + 1;
    true
}

/// Odometer over per-type compositions, first type most significant.
struct Candidates {
    current: Option<Vec<Vec<usize>>>,
}

impl Iterator for Candidates {
    type Item = Vec<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        let out = self.current.clone()?;
        let mut cur = self.current.take().unwrap();
        let mut t = cur.len();
        let advanced = loop {
            if t == 0 {
                break false;
            }
            t -= 1;
            if next_composition(&mut cur[t]) {
                break true;
            }
            let total: usize = cur[t].iter().sum();
            cur[t].iter_mut().for_each(|v| *v = 0);
            cur[t][0] = total;
        };
        if advanced {
            self.current = Some(cur);
        }
        Some(out)
    }
}

const CHUNK: usize = 2048;

/// Searches type-symmetric profiles on the `epsilon/n` grid of the cost-rounded
/// game and returns the first one that is an `epsilon`-equilibrium there.
pub fn ptas_solve(game: &ScoreSymmetricGame, epsilon: &Rat) -> Result<PtasResult> {
    let m = inverse_integer_floor(epsilon)?;
    let eps = grid(1, m);
    let n = game.num_strategies();
    let d = game.num_players();
    let rounded = ScoreSymmetricGame::new(
        game.scores.clone(),
        round_costs_down(&game.costs, m),
        game.prizes.clone(),
    )?;
    let mut types: Vec<TypeClass> = Vec::new();
    for (i, row) in rounded.costs.iter().enumerate() {
        match types.iter_mut().find(|t| &t.rounded_costs == row) {
            Some(t) => t.members.push(i),
            None => types.push(TypeClass { rounded_costs: row.clone(), members: vec![i] }),
        }
    }
    let grid_set = StrategyGrid::new(n, m * n as u64);
    let s = grid_set.len();
    let sizes: Vec<usize> = types.iter().map(|t| t.members.len()).collect();
    let candidates_total = ptas_candidate_count(&sizes, s).unwrap_or(u128::MAX);

    let build = |assignment: &Vec<Vec<usize>>| -> MixedProfile {
        let mut rows = vec![Vec::new(); d];
        for (t, comp) in types.iter().zip(assignment) {
            let mut members = t.members.iter();
            for (g, &count) in comp.iter().enumerate() {
                for &player in members.by_ref().take(count) {
                    rows[player] = grid_set.row(g);
                }
            }
        }
        MixedProfile { rows }
    };
    let mut iter = all_candidates(&sizes, s);
    let mut checked: u128 = 0;
    loop {
        let chunk: Vec<_> = iter.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let hit = chunk.par_iter().enumerate().find_map_first(|(k, a)| {
            let profile = build(a);
            let cert = verify_symmetric(&rounded, &profile).expect("grid profile fits");
            (cert.epsilon <= eps).then_some((k, profile, cert))
        });
        if let Some((k, profile, rounded_certificate)) = hit {
            checked += k as u128 + 1;
            let certificate = verify_symmetric(game, &profile)?;
            return Ok(PtasResult {
                profile,
                certificate,
                rounded_certificate,
                epsilon: eps,
                types,
                grid_size: s,
                candidates_total,
                candidates_checked: checked,
            });
        }
        checked += chunk.len() as u128;
    }
    Err(Error::Internal(format!(
        "no {eps}-equilibrium among {checked} grid candidates"
    )))
}

fn all_candidates(sizes: &[usize], s: usize) -> Candidates {
    let start = sizes
        .iter()
        .map(|&dt| {
            let mut c = vec![0; s];
            c[0] = dt;
            c
        })
        .collect();
    Candidates { current: Some(start) }
}

/// Walks the candidate enumeration without checking anything and counts it.
pub fn ptas_enumerated_count(type_sizes: &[usize], s: usize) -> u128 {
    all_candidates(type_sizes, s).map(|_| 1u128).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn compositions_descend() {
        let all: Vec<_> = all_candidates(&[2], 3).collect();
        let flat: Vec<Vec<usize>> = all.into_iter().map(|mut v| v.remove(0)).collect();
        assert_eq!(
            flat,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
    }

    #[test]
    fn candidate_count_formula() {
        for (sizes, s) in [(vec![3usize], 4usize), (vec![2, 1], 5), (vec![1, 1, 2], 3)] {
            let listed = ptas_enumerated_count(&sizes, s);
            assert_eq!(Some(listed), ptas_candidate_count(&sizes, s));
        }
    }

    #[test]
    fn grid_starts_pure_weakest() {
        let g = StrategyGrid::new(3, 2);
        assert_eq!(g.vectors[0], vec![2, 0, 0]);
        assert_eq!(g.len(), 6);
    }

    #[test]
    fn four_players_cheap_strong_action() {
        let game = ScoreSymmetricGame::new(
            vec![r("1"), r("2")],
            vec![vec![r("0"), r("1/5")]; 4],
            vec![r("1"), r("0"), r("0"), r("0")],
        )
        .unwrap();
        let res = ptas_solve(&game, &r("1/2")).unwrap();
        assert!(res.rounded_certificate.epsilon <= r("1/2"));
        assert!(res.certificate.epsilon <= r("1"));
        assert_eq!(res.candidates_total, 70);
    }

    #[test]
    fn single_player_takes_cheapest() {
        let game = ScoreSymmetricGame::new(
            vec![r("1"), r("2")],
            vec![vec![r("0"), r("1/2")]],
            vec![r("1")],
        )
        .unwrap();
        let res = ptas_solve(&game, &r("1/3")).unwrap();
        assert_eq!(res.profile.rows[0], vec![r("1"), r("0")]);
        assert!(res.certificate.is_exact_equilibrium());
    }
}
