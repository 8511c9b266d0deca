//! Seeded instance sets for the benchmarks.

use conpart_core::generate::{homogeneous_orthant, zero_gap_instance, Shape};
use conpart_core::ConicProblem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` zero-gap problems of the given shape.
pub fn corpus(shape: &Shape, count: usize, seed: u64) -> Vec<ConicProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| zero_gap_instance(shape, &mut rng, &format!("bench{i}")).problem)
        .collect()
}

/// `count` homogeneous all-orthant problems.
pub fn homogeneous_corpus(count: usize, seed: u64) -> Vec<ConicProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| homogeneous_orthant(&mut rng, 6, 10, "bench-h"))
        .collect()
}
