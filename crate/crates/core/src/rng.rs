//! Seeded generators for parameters and inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{Matrix, Scalar};

/// The default seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 42;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the seed of instance `index` of a suite from a base seed.
///
/// Instance seeds are printed on failure, so the mapping only has to be
/// stable, not invertible.
pub fn instance_seed(base: u64, index: u64) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add(index)
}

/// Matrix with entries drawn uniformly from `[-bound, bound]`.
pub fn uniform<T: Scalar>(rng: &mut impl Rng, rows: usize, cols: usize, bound: f64) -> Matrix<T> {
    let data = (0..rows * cols)
        .map(|_| T::from_f64(rng.gen_range(-bound..=bound)))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("uniform draws are finite and sized")
}

/// Uniform matrix rescaled to unit root-mean-square.
pub fn unit_rms(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix<f64> {
    let m: Matrix<f64> = uniform(rng, rows, cols, 1.0);
    let rms = (m.data().iter().map(|v| v * v).sum::<f64>() / m.len() as f64).sqrt();
    if rms == 0.0 {
        return m;
    }
    m.scale(1.0 / rms)
}
