use crate::error::{Error, Result};
use crate::rat::{floor_mul, grid, Rat};

/// Largest `m` with `1/m <= epsilon`; rejects non-positive input.
pub fn inverse_integer_floor(epsilon: &Rat) -> Result<u64> {
    epsilon
        .round_down_to_inverse_integer()
        .filter(|&m| m > 0)
        .ok_or_else(|| Error::Precondition(format!("accuracy {epsilon} must be positive")))
}

/// Rounds a probability vector onto the `epsilon` grid while keeping every
/// prefix sum within `epsilon` of the original. Rounds up while the rounded
/// prefix trails the true prefix, down otherwise.
pub fn epsilon_round(x: &[Rat], epsilon: &Rat) -> Result<Vec<Rat>> {
    let m = epsilon
        .inverse_integer()
        .ok_or_else(|| Error::Precondition(format!("{epsilon} is not the inverse of an integer")))?;
    let total: Rat = x.iter().sum();
    if !total.is_one() || x.iter().any(Rat::is_negative) {
        return Err(Error::Precondition("input is not a probability vector".into()));
    }
    let mut rounded = Vec::with_capacity(x.len());
    let mut true_prefix = Rat::zero();
    let mut round_prefix = Rat::zero();
    for v in x {
        let scaled = v * &Rat::from_int(m as i64);
        let k = if round_prefix <= true_prefix {
            scaled.ceil()
        } else {
            scaled.floor()
        };
        let r = k / Rat::from_int(m as i64);
        true_prefix += v;
        round_prefix += &r;
        rounded.push(r);
    }
    debug_assert!(round_prefix.is_one());
    Ok(rounded)
}

/// Each cost rounded down to a multiple of `1/m`.
pub fn round_costs_down(costs: &[Vec<Rat>], m: u64) -> Vec<Vec<Rat>> {
    costs
        .iter()
        .map(|row| row.iter().map(|c| grid(floor_mul(c, m), m)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn halves_on_thirds() {
        let out = epsilon_round(&[r("1/2"), r("1/2")], &r("1/3")).unwrap();
        assert_eq!(out, vec![r("2/3"), r("1/3")]);
    }

    #[test]
    fn grid_vectors_are_fixed() {
        let x = vec![r("1/4"), r("0"), r("3/4")];
        assert_eq!(epsilon_round(&x, &r("1/4")).unwrap(), x);
    }

    #[test]
    fn rejects_non_inverse_integer() {
        assert!(epsilon_round(&[r("1")], &r("2/5")).is_err());
        assert_eq!(inverse_integer_floor(&r("2/5")).unwrap(), 3);
        assert_eq!(inverse_integer_floor(&r("1/4")).unwrap(), 4);
        assert!(inverse_integer_floor(&r("0")).is_err());
    }

    #[test]
    fn costs_round_down() {
        let c = round_costs_down(&[vec![r("0"), r("3/10"), r("1")]], 4);
        assert_eq!(c, vec![vec![r("0"), r("1/4"), r("1")]]);
    }
}
