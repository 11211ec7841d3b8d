use std::f64::consts::TAU;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth state vector around 1 p.u.: a slow oscillation, a linear drift and
/// a weaker second harmonic, with frequencies, phases and drift drawn from
/// the seed. Stands in for a concatenated snapshot of correlated bus states.
pub fn correlated_telemetry(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f1 = rng.random_range(0.5..2.0);
    let phase1 = rng.random_range(0.0..TAU);
    let drift = rng.random_range(-0.03..0.03);
    let f2 = rng.random_range(2.0..4.0);
    let phase2 = rng.random_range(0.0..TAU);
    DVector::from_fn(n, |i, _| {
        let t = i as f64 / n as f64;
        1.0 + 0.05 * (TAU * f1 * t + phase1).sin() + drift * t + 0.02 * (TAU * f2 * t + phase2).sin()
    })
}
