use rand::Rng;
use std::fmt::Debug;

/// What the search engine needs from an optimisation problem.
///
/// Fitness is always maximised. `encode_solution` maps a feasible solution
/// into `[-1, 1]^visible_size` so it can be used as a training example, and
/// `interpret` maps any continuous decoder output back to a feasible
/// solution. For every feasible `s`, `interpret(encode_solution(s)) == s`.
pub trait Problem {
    type Solution: Clone + PartialEq + Debug;

    fn visible_size(&self) -> usize;

    fn fitness(&self, solution: &Self::Solution) -> f64;

    /// Uniform random feasible solution, used for resets without a model.
    fn random_solution<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Solution;

    /// The problem's own local move (bit flip, location insert, ...).
    fn naive_variation<R: Rng + ?Sized>(&self, solution: &Self::Solution, rng: &mut R) -> Self::Solution;

    fn interpret<R: Rng + ?Sized>(&self, decoded: &[f64], rng: &mut R) -> Self::Solution;

    fn encode_solution(&self, solution: &Self::Solution) -> Vec<f64>;

    /// Fitness of a known global optimum, when there is one.
    fn target_fitness(&self) -> Option<f64> {
        None
    }
}
