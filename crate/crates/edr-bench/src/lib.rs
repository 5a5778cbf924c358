//! Shared fixtures for the criterion benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use edr_core::{sampling, CouplingParams, GaussianState, TransferMatrix};

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xBE7C)
}

/// A batch of coupling triples spanning all three regimes.
pub fn coupling_batch(count: usize) -> Vec<CouplingParams> {
    let mut rng = rng();
    (0..count)
        .map(|_| sampling::random_coupling(&mut rng, 5.0))
        .collect()
}

pub fn matrix_state_batch(count: usize) -> Vec<(TransferMatrix, GaussianState, GaussianState)> {
    let mut rng = rng();
    (0..count)
        .map(|_| {
            (
                sampling::random_matrix(&mut rng, 3.0),
                sampling::random_state(&mut rng, 1.0),
                sampling::random_state(&mut rng, 1.0),
            )
        })
        .collect()
}

pub fn pure_pair() -> (GaussianState, GaussianState) {
    let mut rng = rng();
    (
        sampling::random_pure_state(&mut rng, 1.0),
        sampling::random_pure_state(&mut rng, 1.0),
    )
}
