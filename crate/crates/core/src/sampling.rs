//! Seeded sample points for sample-based structural checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg3::Vec3;

/// Seed of the default Casimir sample set.
pub const CASIMIR_SEED: u64 = 42;
/// Size of the default Casimir sample set.
pub const CASIMIR_SAMPLES: usize = 1000;
/// Half-width of the default sampling box `[-2, 2]³`.
pub const BOX_HALF_WIDTH: f64 = 2.0;

/// `n` points uniform in `[-half_width, half_width]³`, reproducible from `seed`.
pub fn uniform_box(n: usize, seed: u64, half_width: f64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            Vec3::new(
                rng.gen_range(-half_width..=half_width),
                rng.gen_range(-half_width..=half_width),
                rng.gen_range(-half_width..=half_width),
            )
        })
        .collect()
}

/// The default sample set used when verifying the Casimir property.
pub fn casimir_samples() -> Vec<Vec3> {
    uniform_box(CASIMIR_SAMPLES, CASIMIR_SEED, BOX_HALF_WIDTH)
}
