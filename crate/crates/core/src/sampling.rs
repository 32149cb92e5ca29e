//! Seeded random band-limited fields for the verification suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::{lit, Scalar};
use crate::spectral::{GridSpec, PeriodicField};

/// Deterministic generator for a verification run.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real field supported on `1 <= |k| <= max_mode` (zero mean) with
/// geometrically decaying coefficients; `amplitude` bounds the sup norm
/// roughly.
pub fn random_band_limited<T: Scalar, R: Rng>(
    grid: GridSpec,
    max_mode: i64,
    amplitude: T,
    rng: &mut R,
) -> PeriodicField<T> {
    let max_mode = max_mode.min(grid.max_mode()).max(1);
    let mut modes = Vec::with_capacity(max_mode as usize);
    let mut decay = T::one();
    let ratio = lit::<T>(0.6);
    let mut mass = T::zero();
    for k in 1..=max_mode {
        let re = lit::<T>(rng.gen_range(-1.0..1.0)) * decay;
        let im = lit::<T>(rng.gen_range(-1.0..1.0)) * decay;
        mass += (re * re + im * im).sqrt() + (re * re + im * im).sqrt();
        modes.push((k, num_complex::Complex::new(re, im)));
        decay *= ratio;
    }
    let scale = amplitude / mass.max(T::min_positive_value());
    let scaled: Vec<_> = modes.into_iter().map(|(k, c)| (k, c * scale)).collect();
    PeriodicField::from_modes(grid, &scaled).expect("modes are inside the band")
}

/// Random field including a mean component.
pub fn random_with_mean<T: Scalar, R: Rng>(
    grid: GridSpec,
    max_mode: i64,
    amplitude: T,
    rng: &mut R,
) -> PeriodicField<T> {
    let base = random_band_limited(grid, max_mode, amplitude, rng);
    let mean = lit::<T>(rng.gen_range(-0.5..0.5)) * amplitude;
    &base + &PeriodicField::constant(grid, mean)
}
