//! Seeded random draws used by the checkers for probe points and test payoffs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::space::{OutcomeSpace, ProbVector, RandomVariable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Payoffs with independent entries uniform on `[-1, 1]`.
pub fn random_payoff(rng: &mut impl Rng, space: &OutcomeSpace) -> RandomVariable {
    let values = (0..space.size()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    RandomVariable::new(space, values).expect("finite values")
}

pub fn random_payoffs(rng: &mut impl Rng, space: &OutcomeSpace, count: usize) -> Vec<RandomVariable> {
    (0..count).map(|_| random_payoff(rng, space)).collect()
}

/// Barycentric weights drawn from a flat Dirichlet via normalized exponentials.
pub fn random_simplex_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Random convex combination of `points`.
pub fn random_mixture(rng: &mut impl Rng, points: &[&ProbVector]) -> ProbVector {
    let coefficients = random_simplex_weights(rng, points.len());
    ProbVector::mixture(points, &coefficients).expect("mixture of valid points")
}
