//! Equilibrium check for 3x3 zero-sum games: is the uniform mixed strategy
//! a best response to itself?

use num_rational::BigRational;
use num_traits::Zero;

use super::problem::{rat, Rat};

/// Row player's payoff matrix; the column player receives the negation.
pub type Matrix3 = [[Rat; 3]; 3];

pub fn standard_rps() -> Matrix3 {
    let z = Rat::zero;
    [
        [z(), rat(-1, 1), rat(1, 1)],
        [rat(1, 1), z(), rat(-1, 1)],
        [rat(-1, 1), rat(1, 1), z()],
    ]
}

/// Standard game with the rock-beats-scissors payoff doubled.
pub fn skewed_rps() -> Matrix3 {
    let mut m = standard_rps();
    m[0][2] = rat(2, 1);
    m[2][0] = rat(-2, 1);
    m
}

/// True exactly when uniform play by both sides is an equilibrium: no pure
/// row deviation gains for the row player, and no pure column deviation
/// gains for the column player. Exact arithmetic throughout.
pub fn rps_equilibrium_check(matrix: &Matrix3) -> bool {
    let third = rat(1, 3);
    let ninth = rat(1, 9);
    let value: Rat = matrix
        .iter()
        .flatten()
        .map(|v| ninth.clone() * v.clone())
        .sum();
    // Row deviations: expected payoff of each pure row against uniform.
    for row in matrix {
        let dev: BigRational = row.iter().map(|v| third.clone() * v.clone()).sum();
        if dev > value {
            return false;
        }
    }
    // Column deviations: the column player's payoff is -M, so a column j
    // with expected row payoff below the value is a gain for them.
    for j in 0..3 {
        let dev: Rat = (0..3).map(|i| third.clone() * matrix[i][j].clone()).sum();
        if dev < value {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_game_is_uniform_equilibrium() {
        assert!(rps_equilibrium_check(&standard_rps()));
    }

    #[test]
    fn doubled_payoff_breaks_uniform_equilibrium() {
        assert!(!rps_equilibrium_check(&skewed_rps()));
    }

    #[test]
    fn zero_matrix_is_equilibrium() {
        let z = Rat::zero;
        let m: Matrix3 = [
            [z(), z(), z()],
            [z(), z(), z()],
            [z(), z(), z()],
        ];
        assert!(rps_equilibrium_check(&m));
    }
}
