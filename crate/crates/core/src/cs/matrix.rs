use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::CodecConfig;

/// Gaussian measurement matrix with i.i.d. `N(0, 1/m)` entries, drawn row by
/// row from a ChaCha8 stream seeded with `cfg.matrix_seed`.
///
/// A square configuration is the uncompressed case and yields the identity.
pub fn gen_measurement_matrix(cfg: &CodecConfig) -> DMatrix<f64> {
    let (m, n) = (cfg.m, cfg.n);
    if m == n {
        return DMatrix::identity(n, n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.matrix_seed);
    let scale = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * n)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    DMatrix::from_row_slice(m, n, &data)
}
