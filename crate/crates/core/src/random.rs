//! Seeded band-limited random fields.
//!
//! Coefficients are drawn in a fixed order over integer wavevectors that does
//! not depend on the grid size, so the same seed yields the same continuous
//! field at every resolution that can hold the band.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::spectral::{ops, Grid, ScalarField, SpectralError, SymTensorField, VectorField};

/// Deterministic generator used for every random ensemble in the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zero-mean real field with Gaussian coefficients on `k_lo ≤ |k| ≤ k_hi`
/// (integer frequencies, Euclidean modulus).
///
/// Fails when the band does not fit below the grid's dealias cutoff.
pub fn band_limited<R: Rng>(
    grid: &Grid,
    k_lo: u32,
    k_hi: u32,
    rng: &mut R,
) -> Result<ScalarField, SpectralError> {
    let cutoff = grid.dealias_cutoff();
    if i64::from(k_hi) > cutoff {
        return Err(SpectralError::InvalidGrid(format!(
            "band limit {k_hi} exceeds dealias cutoff {cutoff} for n = {}",
            grid.n()
        )));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let hi = i64::from(k_hi);
    let (lo2, hi2) = (i64::from(k_lo).pow(2), hi * hi);
    for k2 in 0..=hi {
        for k1 in -hi..=hi {
            if k2 == 0 && k1 <= 0 {
                continue;
            }
            let m = k1 * k1 + k2 * k2;
            if m < lo2.max(1) || m > hi2 {
                continue;
            }
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(re, im) * 0.5;
            let i = grid.index_of(k1, k2).expect("band fits the grid");
            let j = grid.index_of(-k1, -k2).expect("band fits the grid");
            coeffs[i] = c;
            coeffs[j] = c.conj();
        }
    }
    ScalarField::from_coeffs(grid, coeffs)
}

/// Band-limited field rescaled so that `‖f‖_{L²} / L = rms`.
pub fn band_limited_rms<R: Rng>(
    grid: &Grid,
    k_lo: u32,
    k_hi: u32,
    rms: f64,
    rng: &mut R,
) -> Result<ScalarField, SpectralError> {
    let f = band_limited(grid, k_lo, k_hi, rng)?;
    let norm = f.l2_norm() / grid.length();
    Ok(if norm > 0.0 { f.scale(rms / norm) } else { f })
}

/// Divergence-free velocity obtained from a band-limited vorticity.
pub fn divergence_free<R: Rng>(
    grid: &Grid,
    k_lo: u32,
    k_hi: u32,
    rms: f64,
    rng: &mut R,
) -> Result<VectorField, SpectralError> {
    let omega = band_limited_rms(grid, k_lo, k_hi, rms, rng)?;
    ops::biot_savart(&omega)
}

/// Symmetric tensor with independent band-limited components.
pub fn tensor<R: Rng>(
    grid: &Grid,
    k_lo: u32,
    k_hi: u32,
    rms: f64,
    rng: &mut R,
) -> Result<SymTensorField, SpectralError> {
    Ok(SymTensorField::new(
        band_limited_rms(grid, k_lo, k_hi, rms, rng)?,
        band_limited_rms(grid, k_lo, k_hi, rms, rng)?,
        band_limited_rms(grid, k_lo, k_hi, rms, rng)?,
    ))
}
