//! Exact rational linear algebra: Gaussian elimination and a two-phase
//! simplex method with Bland's anti-cycling rule.

use crate::rat::Rat;

/// Dense `matrix * x = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub matrix: Vec<Vec<Rat>>,
    pub rhs: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemSolution {
    Unique(Vec<Rat>),
    /// Solvable with free variables; carries the basic solution that sets every
    /// free variable to zero.
    Underdetermined(Vec<Rat>),
    Inconsistent,
}

impl SystemSolution {
    pub fn witness(&self) -> Option<&[Rat]> {
        match self {
            SystemSolution::Unique(x) | SystemSolution::Underdetermined(x) => Some(x),
            SystemSolution::Inconsistent => None,
        }
    }
}

impl LinearSystem {
    pub fn new(matrix: Vec<Vec<Rat>>, rhs: Vec<Rat>) -> Self {
        assert_eq!(matrix.len(), rhs.len(), "row count differs from rhs length");
        LinearSystem { matrix, rhs }
    }

    pub fn num_unknowns(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }
}

/// Reduces `[A | b]` to reduced row echelon form and classifies the system.
pub fn solve_system(sys: &LinearSystem) -> SystemSolution {
    let n = sys.num_unknowns();
    let mut rows: Vec<Vec<Rat>> = sys
        .matrix
        .iter()
        .zip(&sys.rhs)
        .map(|(row, b)| {
            assert_eq!(row.len(), n, "ragged coefficient matrix");
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip().unwrap();
        for x in rows[rank].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(&factor * p);
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if rows[rank..].iter().any(|r| !r[n].is_zero()) {
        return SystemSolution::Inconsistent;
    }
    let mut x = vec![Rat::zero(); n];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = rows[r][n].clone();
    }
    if rank == n {
        SystemSolution::Unique(x)
    } else {
        SystemSolution::Underdetermined(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub relation: Relation,
    pub rhs: Rat,
}

/// `optimize objective . x` subject to the constraints and per-variable bounds.
/// Variables default to `x >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rat>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(Option<Rat>, Option<Rat>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, point: Vec<Rat> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Rat, Vec<Rat>)> {
        match self {
            LpOutcome::Optimal { value, point } => Some((value, point)),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: vec![Rat::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![(Some(Rat::zero()), None); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, objective: Vec<Rat>) -> &mut Self {
        assert_eq!(objective.len(), self.num_vars());
        self.objective = objective;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rat>, relation: Relation, rhs: Rat) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars());
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rat>, upper: Option<Rat>) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, None, None)
    }

    /// Every constraint and bound holds exactly at `point`.
    pub fn is_feasible(&self, point: &[Rat]) -> bool {
        if point.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = point.iter().zip(&self.bounds).all(|(x, (lo, hi))| {
            lo.as_ref().is_none_or(|l| x >= l) && hi.as_ref().is_none_or(|h| x <= h)
        });
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs: Rat = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }

    pub fn objective_value(&self, point: &[Rat]) -> Rat {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }
}

/// Original variable as `offset + sum(coeff * y_k)` over standard-form columns.
struct Substitution {
    offset: Rat,
    terms: Vec<(usize, Rat)>,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    /// Reduced costs; the last entry is minus the objective value.
    obj: Vec<Rat>,
    basis: Vec<usize>,
    /// Columns that may never enter (artificials during phase two).
    barred: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip().expect("pivot on zero");
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Rat>| {
            if row[c].is_zero() {
                return;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(&factor * p);
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// One iteration of Bland's rule.
    fn step(&mut self) -> Step {
        let w = self.width();
        let Some(enter) = (0..w).find(|&j| !self.barred[j] && self.obj[j].is_negative()) else {
            return Step::Optimal;
        };
        let mut leave: Option<(usize, Rat)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[w] / &row[enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        match leave {
            None => Step::Unbounded,
            Some((r, _)) => {
                self.pivot(r, enter);
                Step::Pivoted
            }
        }
    }

    fn run(&mut self) -> bool {
        loop {
            match self.step() {
                Step::Optimal => return true,
                Step::Unbounded => return false,
                Step::Pivoted => {}
            }
        }
    }

    fn set_costs(&mut self, costs: &[Rat]) {
        let w = self.width();
        let mut obj: Vec<Rat> = costs.to_vec();
        obj.push(Rat::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &costs[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=w {
                if !row[j].is_zero() {
                    obj[j] -= &(cb * &row[j]);
                }
            }
        }
        self.obj = obj;
    }
}

/// Solves the program exactly. Returned optimal points satisfy every
/// constraint with zero residual.
pub fn solve_lp(lp: &LinearProgram) -> LpOutcome {
    // Map each original variable onto non-negative standard-form columns.
    let mut subs = Vec::with_capacity(lp.num_vars());
    let mut ncols = 0usize;
    let mut extra_rows: Vec<(Vec<(usize, Rat)>, Rat)> = Vec::new();
    for (lo, hi) in &lp.bounds {
        match (lo, hi) {
            (Some(l), h) => {
                let y = ncols;
                ncols += 1;
                if let Some(h) = h {
                    extra_rows.push((vec![(y, Rat::one())], h - l));
                }
                subs.push(Substitution { offset: l.clone(), terms: vec![(y, Rat::one())] });
            }
            (None, Some(h)) => {
                let y = ncols;
                ncols += 1;
                subs.push(Substitution { offset: h.clone(), terms: vec![(y, -Rat::one())] });
            }
            (None, None) => {
                let (p, m) = (ncols, ncols + 1);
                ncols += 2;
                subs.push(Substitution {
                    offset: Rat::zero(),
                    terms: vec![(p, Rat::one()), (m, -Rat::one())],
                });
            }
        }
    }
    if let Some((l, h)) = lp.bounds.iter().find_map(|(l, h)| l.as_ref().zip(h.as_ref())) {
        if h < l {
            return LpOutcome::Infeasible;
        }
    }

    // Rows over the structural columns, with relation and rhs.
    let mut rows: Vec<(Vec<Rat>, Relation, Rat)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![Rat::zero(); ncols];
        let mut rhs = c.rhs.clone();
        for (a, s) in c.coeffs.iter().zip(&subs) {
            if a.is_zero() {
                continue;
            }
            rhs -= &(a * &s.offset);
            for (k, t) in &s.terms {
                coeffs[*k] += a * t;
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    for (terms, rhs) in extra_rows {
        let mut coeffs = vec![Rat::zero(); ncols];
        for (k, t) in terms {
            coeffs[k] = t;
        }
        rows.push((coeffs, Relation::Le, rhs));
    }
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if rhs.is_negative() {
            for a in coeffs.iter_mut() {
                *a = -std::mem::take(a);
            }
            *rhs = -std::mem::take(rhs);
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Slack/surplus columns, then artificials.
    let m = rows.len();
    let n_slack = rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let n_art = rows.iter().filter(|(_, r, _)| *r != Relation::Le).count();
    let width = ncols + n_slack + n_art;
    let mut tableau_rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut is_art = vec![false; width];
    let mut next_slack = ncols;
    let mut next_art = ncols + n_slack;
    for (coeffs, rel, rhs) in &rows {
        let mut row = vec![Rat::zero(); width + 1];
        row[..ncols].clone_from_slice(coeffs);
        row[width] = rhs.clone();
        match rel {
            Relation::Le => {
                row[next_slack] = Rat::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rat::one();
                next_slack += 1;
                row[next_art] = Rat::one();
                is_art[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = Rat::one();
                is_art[next_art] = true;
                basis.push(next_art);
                next_art += 1;
            }
        }
        tableau_rows.push(row);
    }
    let mut t = Tableau {
        rows: tableau_rows,
        obj: vec![Rat::zero(); width + 1],
        basis,
        barred: vec![false; width],
    };

    if n_art > 0 {
        let phase1: Vec<Rat> = is_art
            .iter()
            .map(|&a| if a { Rat::one() } else { Rat::zero() })
            .collect();
        t.set_costs(&phase1);
        t.run();
        // obj[width] holds minus the phase-one optimum.
        if !t.obj[width].is_zero() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis or drop redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if is_art[t.basis[r]] {
                match (0..width).find(|&j| !is_art[j] && !t.rows[r][j].is_zero()) {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        t.barred = is_art.clone();
    }

    let mut costs = vec![Rat::zero(); width];
    let flip = lp.sense == Sense::Maximize;
    for (c, s) in lp.objective.iter().zip(&subs) {
        for (k, coef) in &s.terms {
            let v = c * coef;
            costs[*k] += if flip { -v } else { v };
        }
    }
    t.set_costs(&costs);
    if !t.run() {
        return LpOutcome::Unbounded;
    }

    let mut y = vec![Rat::zero(); width];
    for (i, &b) in t.basis.iter().enumerate() {
        y[b] = t.rows[i][width].clone();
    }
    let point: Vec<Rat> = subs
        .iter()
        .map(|s| {
            let mut v = s.offset.clone();
            for (k, coef) in &s.terms {
                v += coef * &y[*k];
            }
            v
        })
        .collect();
    let value = lp.objective_value(&point);
    debug_assert!(lp.is_feasible(&point));
    LpOutcome::Optimal { value, point }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn rv(v: &[&str]) -> Vec<Rat> {
        v.iter().map(|s| r(s)).collect()
    }

    #[test]
    fn unique_two_by_two() {
        let sys = LinearSystem::new(vec![rv(&["1", "1"]), rv(&["1", "-1"])], rv(&["1", "0"]));
        assert_eq!(solve_system(&sys), SystemSolution::Unique(rv(&["1/2", "1/2"])));
    }

    #[test]
    fn singular_systems() {
        let sys = LinearSystem::new(vec![rv(&["1", "1"]), rv(&["2", "2"])], rv(&["1", "2"]));
        match solve_system(&sys) {
            SystemSolution::Underdetermined(x) => assert_eq!(&x[0] + &x[1], Rat::one()),
            other => panic!("{other:?}"),
        }
        let sys = LinearSystem::new(vec![rv(&["1", "1"]), rv(&["2", "2"])], rv(&["1", "3"]));
        assert_eq!(solve_system(&sys), SystemSolution::Inconsistent);
    }

    #[test]
    fn overdetermined_consistent() {
        let sys = LinearSystem::new(
            vec![rv(&["1", "0"]), rv(&["0", "1"]), rv(&["1", "1"])],
            rv(&["1", "2", "3"]),
        );
        assert_eq!(solve_system(&sys), SystemSolution::Unique(rv(&["1", "2"])));
    }

    #[test]
    fn matching_pennies_value() {
        // max v s.t. for each column, row mix earns >= v; p1 + p2 = 1.
        let mut lp = LinearProgram::new(3, Sense::Maximize);
        lp.set_objective(rv(&["0", "0", "1"])).free(2);
        lp.add_constraint(rv(&["1", "-1", "-1"]), Relation::Ge, Rat::zero());
        lp.add_constraint(rv(&["-1", "1", "-1"]), Relation::Ge, Rat::zero());
        lp.add_constraint(rv(&["1", "1", "0"]), Relation::Eq, Rat::one());
        let (value, point) = solve_lp(&lp).optimal().unwrap();
        assert_eq!(value, Rat::zero());
        assert_eq!(point, rv(&["1/2", "1/2", "0"]));
    }

    #[test]
    fn bounded_and_unbounded() {
        let mut lp = LinearProgram::new(1, Sense::Maximize);
        lp.set_objective(rv(&["1"]));
        lp.add_constraint(rv(&["1"]), Relation::Le, r("3"));
        assert_eq!(
            solve_lp(&lp),
            LpOutcome::Optimal { value: r("3"), point: rv(&["3"]) }
        );
        let mut lp = LinearProgram::new(1, Sense::Maximize);
        lp.set_objective(rv(&["1"]));
        assert_eq!(solve_lp(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = LinearProgram::new(1, Sense::Minimize);
        lp.add_constraint(rv(&["1"]), Relation::Ge, r("2"));
        lp.add_constraint(rv(&["1"]), Relation::Le, r("1"));
        assert_eq!(solve_lp(&lp), LpOutcome::Infeasible);
    }

    #[test]
    fn bounds_are_honoured() {
        // min x - y with -2 <= x <= 5, y <= 4 free below.
        let mut lp = LinearProgram::new(2, Sense::Minimize);
        lp.set_objective(rv(&["1", "-1"]));
        lp.set_bounds(0, Some(r("-2")), Some(r("5")));
        lp.set_bounds(1, None, Some(r("4")));
        let (value, point) = solve_lp(&lp).optimal().unwrap();
        assert_eq!(point, rv(&["-2", "4"]));
        assert_eq!(value, r("-6"));
    }

    #[test]
    fn blands_rule_escapes_classic_cycling_instance() {
        // Beale-style instance that cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::new(4, Sense::Maximize);
        lp.set_objective(rv(&["10", "-57", "-9", "-24"]));
        lp.add_constraint(rv(&["1/2", "-11/2", "-5/2", "9"]), Relation::Le, r("0"));
        lp.add_constraint(rv(&["1/2", "-3/2", "-1/2", "1"]), Relation::Le, r("0"));
        lp.add_constraint(rv(&["1", "0", "0", "0"]), Relation::Le, r("1"));
        let (value, point) = solve_lp(&lp).optimal().unwrap();
        assert_eq!(value, r("1"));
        assert!(lp.is_feasible(&point));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2, Sense::Minimize);
        lp.set_objective(rv(&["1", "2"]));
        lp.add_constraint(rv(&["1", "1"]), Relation::Eq, r("1"));
        lp.add_constraint(rv(&["2", "2"]), Relation::Eq, r("2"));
        let (value, point) = solve_lp(&lp).optimal().unwrap();
        assert_eq!(value, r("1"));
        assert_eq!(point, rv(&["1", "0"]));
    }
}
