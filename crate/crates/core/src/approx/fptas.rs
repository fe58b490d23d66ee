//! Block dynamic program over strategies in score order. A state after block
//! `j` holds, per player, the grid mass placed on strategies `0..j` and the
//! best payoff seen so far. A transition picks every player's mass on the next
//! strategy and must pass the relaxed best-response filters.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::rounding::{inverse_integer_floor, round_costs_down};
use crate::error::{Error, Result};
use crate::game::{MixedProfile, ScoreSymmetricGame};
use crate::payoff::{verify_symmetric, EquilibriumCertificate, TieCountDistribution};
use crate::rat::{grid, Rat};

#[derive(Clone, Debug, Default)]
pub struct FptasOptions {
    /// Grid step replacing the default `epsilon / (4 d^2 3^d)`.
    pub delta_override: Option<Rat>,
    /// Stop after expanding this many states.
    pub node_budget: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FptasState {
    /// Number of strategies already assigned.
    pub block: usize,
    /// Per player, assigned mass in grid units.
    pub sigma: Vec<u64>,
    /// Per player, best payoff over the assigned strategies.
    pub alpha: Vec<Rat>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FptasStats {
    pub states_expanded: u64,
    pub transitions_kept: u64,
    pub dead_states: usize,
    /// Distinct states expanded at each block.
    pub states_per_block: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FptasResult {
    pub profile: MixedProfile,
    /// Certificate on the input game.
    pub certificate: EquilibriumCertificate,
    /// Filter accuracy actually used, `1/m`.
    pub epsilon: Rat,
    pub delta: Rat,
    /// `path[i][j]`: grid units player `i` puts on strategy `j`.
    pub path: Vec<Vec<u64>>,
    pub stats: FptasStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FilterViolation {
    Shape,
    /// A row does not add up to the full grid mass.
    Unclosed { player: usize },
    /// Strategy `block` beats all weaker ones by more than epsilon, yet weaker mass exists.
    WeakerMass { block: usize, player: usize },
    /// Strategy `block` trails a weaker one by more than epsilon, yet carries mass.
    DominatedMass { block: usize, player: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Free,
    Above,
    Below,
}

struct Model {
    d: usize,
    n: usize,
    m: u64,
    eps: Rat,
    costs: Vec<Vec<Rat>>,
    prizes: Vec<Rat>,
    units: Vec<Rat>,
}

impl Model {
    fn new(game: &ScoreSymmetricGame, eps: Rat, m: u64) -> Self {
        Model {
            d: game.num_players(),
            n: game.num_strategies(),
            m,
            eps,
            costs: round_costs_down(&game.costs, m),
            prizes: game.effective_prizes(),
            units: (0..=m).map(|k| grid(k, m)).collect(),
        }
    }

    /// Payoff of strategy `block` for `player` given each opponent's mass below
    /// (`sigma`) and on (`x`) that strategy.
    fn payoff(&self, player: usize, block: usize, sigma: &[u64], x: &[u64]) -> Rat {
        let mut dist = TieCountDistribution::new(self.d - 1);
        for k in (0..self.d).filter(|&k| k != player) {
            let above = &self.units[(self.m - sigma[k] - x[k]) as usize];
            dist.push(above, &self.units[x[k] as usize], &self.units[sigma[k] as usize]);
        }
        dist.expected_share(&self.prizes) - &self.costs[player][block]
    }

    fn classify(&self, block: usize, pi: &Rat, alpha: &Rat) -> Class {
        if block == 0 {
            Class::Free
        } else if *pi > alpha + &self.eps {
            Class::Above
        } else if *pi < alpha - &self.eps {
            Class::Below
        } else {
            Class::Free
        }
    }

    fn range(&self, block: usize, sigma: u64) -> (u64, u64) {
        if block + 1 == self.n {
            (self.m - sigma, self.m - sigma)
        } else {
            (0, self.m - sigma)
        }
    }
}

/// Mixed-radix enumeration of opponent choices, skipping `player`.
fn opponent_index(x: &[u64], lows: &[u64], sizes: &[u64], player: usize) -> usize {
    let mut index = 0usize;
    for k in 0..x.len() {
        if k != player {
            index = index * sizes[k] as usize + (x[k] - lows[k]) as usize;
        }
    }
    index
}

/// Per player, payoffs of the current strategy for every opponent choice.
type PayoffTables = Arc<Vec<Vec<Rat>>>;

struct Search<'a> {
    model: &'a Model,
    guide: Vec<Vec<u64>>,
    tables: HashMap<(usize, Vec<u64>), PayoffTables>,
    dead: HashSet<FptasState>,
    seen: Vec<HashSet<(Vec<u64>, Vec<Rat>)>>,
    stats: FptasStats,
    budget: Option<u64>,
    path: Vec<Vec<u64>>,
}

impl Search<'_> {
    fn tables(&mut self, block: usize, sigma: &[u64]) -> PayoffTables {
        let key = (block, sigma.to_vec());
        if let Some(t) = self.tables.get(&key) {
            return t.clone();
        }
        let model = self.model;
        let d = model.d;
        let (lows, sizes) = bounds(model, block, sigma);
        let tables: Vec<Vec<Rat>> = (0..d)
            .map(|i| {
                let combos: usize = (0..d).filter(|&k| k != i).map(|k| sizes[k] as usize).product();
                let mut x = lows.clone();
                let mut out = Vec::with_capacity(combos);
                for _ in 0..combos {
                    out.push(model.payoff(i, block, sigma, &x));
                    // advance the odometer over opponents, last opponent fastest
                    for k in (0..d).rev().filter(|&k| k != i) {
                        x[k] += 1;
                        if x[k] < lows[k] + sizes[k] {
                            break;
                        }
                        x[k] = lows[k];
                    }
                }
                out
            })
            .collect();
        let tables = Arc::new(tables);
        self.tables.insert(key, tables.clone());
        tables
    }

    fn dfs(&mut self, state: FptasState) -> Result<bool> {
        let model = self.model;
        let d = model.d;
        let block = state.block;
        if let Some(budget) = self.budget {
            if self.stats.states_expanded >= budget {
                return Err(Error::Internal(format!(
                    "search budget of {budget} states exhausted"
                )));
            }
        }
        self.stats.states_expanded += 1;
        if self.seen[block].insert((state.sigma.clone(), state.alpha.clone())) {
            self.stats.states_per_block[block] += 1;
        }
        let tables = self.tables(block, &state.sigma);
        let (lows, sizes) = bounds(model, block, &state.sigma);
        let classes: Vec<Vec<Class>> = (0..d)
            .map(|i| {
                tables[i]
                    .iter()
                    .map(|pi| model.classify(block, pi, &state.alpha[i]))
                    .collect()
            })
            .collect();

        let mut children: Vec<(u64, Vec<u64>)> = Vec::new();
        let total: usize = sizes.iter().map(|&s| s as usize).product();
        let mut x = lows.clone();
        for _ in 0..total {
            let ok = (0..d).all(|i| match classes[i][opponent_index(&x, &lows, &sizes, i)] {
                Class::Free => true,
                Class::Above => state.sigma[i] == 0,
                Class::Below => x[i] == 0,
            });
            if ok {
                let distance = (0..d)
                    .map(|i| (state.sigma[i] + x[i]).abs_diff(self.guide[i][block + 1]))
                    .sum();
                children.push((distance, x.clone()));
            }
            for k in (0..d).rev() {
                x[k] += 1;
                if x[k] < lows[k] + sizes[k] {
                    break;
                }
                x[k] = lows[k];
            }
        }
        children.sort();
        self.stats.transitions_kept += children.len() as u64;

        for (_, x) in children {
            let sigma: Vec<u64> = state.sigma.iter().zip(&x).map(|(s, v)| s + v).collect();
            let alpha: Vec<Rat> = (0..d)
                .map(|i| {
                    let pi = &tables[i][opponent_index(&x, &lows, &sizes, i)];
                    if block == 0 {
                        pi.clone()
                    } else {
                        state.alpha[i].clone().max(pi.clone())
                    }
                })
                .collect();
            self.path.push(x);
            if block + 1 == model.n {
                return Ok(true);
            }
            let child = FptasState { block: block + 1, sigma, alpha };
            if !self.dead.contains(&child) {
                if self.dfs(child.clone())? {
                    return Ok(true);
                }
                self.dead.insert(child);
            }
            self.path.pop();
        }
        Ok(false)
    }
}

fn bounds(model: &Model, block: usize, sigma: &[u64]) -> (Vec<u64>, Vec<u64>) {
    sigma
        .iter()
        .map(|&s| {
            let (lo, hi) = model.range(block, s);
            (lo, hi - lo + 1)
        })
        .unzip()
}

/// Cumulative grid mass per player and block along an approximate
/// equilibrium found by fictitious play; used only to order the search.
fn guide(model: &Model) -> Vec<Vec<u64>> {
    let d = model.d;
    let n = model.n;
    let costs: Vec<Vec<f64>> = model
        .costs
        .iter()
        .map(|r| r.iter().map(Rat::to_f64).collect())
        .collect();
    let prizes: Vec<f64> = model.prizes.iter().map(Rat::to_f64).collect();
    let mut counts = vec![vec![1.0f64; n]; d];
    let mut totals = vec![n as f64; d];
    let rounds = 4000usize;
    for _ in 0..rounds {
        let mixes: Vec<Vec<f64>> = counts
            .iter()
            .zip(&totals)
            .map(|(c, t)| c.iter().map(|v| v / t).collect())
            .collect();
        for i in 0..d {
            let best = (0..n)
                .map(|j| (j, payoff_f64(&mixes, &prizes, i, j) - costs[i][j]))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 + 1e-12 { b } else { a })
                .0;
            counts[i][best] += 1.0;
            totals[i] += 1.0;
        }
    }
    counts
        .iter()
        .zip(&totals)
        .map(|(c, t)| {
            let mut acc = 0.0;
            let mut out = vec![0u64];
            for v in c {
                acc += v / t;
                out.push(((acc * model.m as f64).round() as u64).min(model.m));
            }
            out[n] = model.m;
            out
        })
        .collect()
}

fn payoff_f64(mixes: &[Vec<f64>], prizes: &[f64], player: usize, j: usize) -> f64 {
    let d = mixes.len();
    let mut table = vec![vec![0.0f64; d]; d];
    table[0][0] = 1.0;
    let mut m = 0;
    for (k, row) in mixes.iter().enumerate() {
        if k == player {
            continue;
        }
        let below: f64 = row[..j].iter().sum();
        let tied = row[j];
        let above = (1.0 - below - tied).max(0.0);
        for total in (0..=m).rev() {
            for h in (0..=total).rev() {
                let t = total - h;
                let p = std::mem::take(&mut table[h][t]);
                table[h + 1][t] += p * above;
                table[h][t + 1] += p * tied;
                table[h][t] += p * below;
            }
        }
        m += 1;
    }
    let mut prefix = vec![0.0];
    for u in prizes {
        prefix.push(prefix.last().unwrap() + u);
    }
    let mut share = 0.0;
    for h in 0..d {
        for t in 0..d - h {
            if table[h][t] != 0.0 {
                share += table[h][t] * (prefix[h + t + 1] - prefix[h]) / (t + 1) as f64;
            }
        }
    }
    share
}

fn default_grid(d: usize, eps_m: u64) -> Result<u64> {
    let factor = 4u64
        .checked_mul((d * d) as u64)
        .and_then(|v| v.checked_mul(3u64.checked_pow(d as u32)?))
        .and_then(|v| v.checked_mul(eps_m))
        .ok_or_else(|| Error::Precondition(format!("default grid for {d} players overflows")))?;
    Ok(factor)
}

pub fn fptas_solve(game: &ScoreSymmetricGame, epsilon: &Rat, delta_override: Option<&Rat>) -> Result<FptasResult> {
    fptas_solve_with(
        game,
        epsilon,
        &FptasOptions { delta_override: delta_override.cloned(), node_budget: None },
    )
}

/// Runs the block search on the game with costs rounded down to the grid and
/// certifies the result on the input game.
pub fn fptas_solve_with(game: &ScoreSymmetricGame, epsilon: &Rat, options: &FptasOptions) -> Result<FptasResult> {
    let eps_m = inverse_integer_floor(epsilon)?;
    let eps = grid(1, eps_m);
    let m = match &options.delta_override {
        Some(delta) => inverse_integer_floor(delta)?,
        None => default_grid(game.num_players(), eps_m)?,
    };
    let model = Model::new(game, eps.clone(), m);
    let d = model.d;
    let n = model.n;
    let mut search = Search {
        model: &model,
        guide: guide(&model),
        tables: HashMap::new(),
        dead: HashSet::new(),
        seen: vec![HashSet::new(); n],
        stats: FptasStats { states_per_block: vec![0; n], ..Default::default() },
        budget: options.node_budget,
        path: Vec::with_capacity(n),
    };
    let root = FptasState { block: 0, sigma: vec![0; d], alpha: vec![Rat::zero(); d] };
    if !search.dfs(root)? {
        return Err(Error::Internal(
            "block search exhausted every state without reaching a full profile".into(),
        ));
    }
    search.stats.dead_states = search.dead.len();
    let path: Vec<Vec<u64>> = (0..d)
        .map(|i| search.path.iter().map(|x| x[i]).collect())
        .collect();
    let rows = path
        .iter()
        .map(|row| row.iter().map(|&k| grid(k, m)).collect())
        .collect();
    let profile = MixedProfile::new(rows)?;
    let certificate = verify_symmetric(game, &profile)?;
    Ok(FptasResult {
        profile,
        certificate,
        epsilon: eps,
        delta: grid(1, m),
        path,
        stats: search.stats,
    })
}

/// Checks a grid path against the block filters, with costs rounded down to
/// multiples of `1/m`. `path[i][j]` is player `i`'s mass on strategy `j`.
pub fn fptas_replay(
    game: &ScoreSymmetricGame,
    epsilon: &Rat,
    m: u64,
    path: &[Vec<u64>],
) -> std::result::Result<(), FilterViolation> {
    let model = Model::new(game, epsilon.clone(), m);
    if path.len() != model.d || path.iter().any(|r| r.len() != model.n) {
        return Err(FilterViolation::Shape);
    }
    if let Some(player) = path.iter().position(|r| r.iter().sum::<u64>() != m) {
        return Err(FilterViolation::Unclosed { player });
    }
    let mut sigma = vec![0u64; model.d];
    let mut alpha = vec![Rat::zero(); model.d];
    for block in 0..model.n {
        let x: Vec<u64> = path.iter().map(|r| r[block]).collect();
        for player in 0..model.d {
            let pi = model.payoff(player, block, &sigma, &x);
            match model.classify(block, &pi, &alpha[player]) {
                Class::Above if sigma[player] > 0 => {
                    return Err(FilterViolation::WeakerMass { block, player })
                }
                Class::Below if x[player] > 0 => {
                    return Err(FilterViolation::DominatedMass { block, player })
                }
                _ => {}
            }
            alpha[player] = if block == 0 { pi } else { alpha[player].clone().max(pi) };
        }
        for (s, v) in sigma.iter_mut().zip(&x) {
            *s += v;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn symmetrized_example_one() -> ScoreSymmetricGame {
        ScoreSymmetricGame::new(
            vec![r("2"), r("3"), r("4"), r("5")],
            vec![
                vec![r("0"), r("0"), r("1/2"), r("1/2")],
                vec![r("0"), r("1/2"), r("1/2"), r("1")],
            ],
            vec![r("1"), r("0")],
        )
        .unwrap()
    }

    #[test]
    fn replay_accepts_rounded_equilibrium() {
        let g = symmetrized_example_one();
        let path = vec![vec![0, 2, 0, 2], vec![2, 0, 2, 0]];
        assert_eq!(fptas_replay(&g, &r("1/4"), 4, &path), Ok(()));
        let bad = vec![vec![4, 0, 0, 0], vec![4, 0, 0, 0]];
        assert_eq!(
            fptas_replay(&g, &r("1/4"), 4, &bad),
            Err(FilterViolation::WeakerMass { block: 1, player: 0 })
        );
    }

    #[test]
    fn small_grid_solution_is_certified() {
        let g = symmetrized_example_one();
        let res = fptas_solve(&g, &r("1/4"), Some(&r("1/8"))).unwrap();
        assert!(res.certificate.epsilon <= r("6") * r("1/4"));
        assert_eq!(fptas_replay(&g, &r("1/4"), 8, &res.path), Ok(()));
    }

    #[test]
    fn default_grid_two_players() {
        assert_eq!(default_grid(2, 4).unwrap(), 576);
        assert_eq!(default_grid(3, 4).unwrap(), 3888);
    }

    #[test]
    fn pure_threshold_equilibrium_survives() {
        let g = ScoreSymmetricGame::new(
            vec![r("1"), r("2")],
            vec![vec![r("0"), r("1/5")]; 3],
            vec![r("1"), r("0"), r("0")],
        )
        .unwrap();
        let path = vec![vec![0, 10], vec![0, 10], vec![0, 10]];
        assert_eq!(fptas_replay(&g, &r("1/4"), 10, &path), Ok(()));
    }
}
