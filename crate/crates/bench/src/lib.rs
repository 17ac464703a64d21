//! Fixtures shared by the benchmarks.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphereopt_core::{BasisCatalog, HomoPoly};

/// Form of degree `d` in `n` variables with coefficients uniform in
/// `[-1, 1)`, reproducible from `seed`.
pub fn random_form(seed: u64, n: usize, d: usize) -> HomoPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = BasisCatalog::shared(n, d).len();
    HomoPoly::from_dense(n, d, &DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0)))
}
