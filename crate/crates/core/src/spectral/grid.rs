use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SpectralError;
use crate::par;

/// Doubly periodic square `[0, L)²` sampled on `n × n` points.
///
/// Arrays are row-major with the row index running along `y`: the sample at
/// `(x, y) = (ix·h, iy·h)` lives at `iy·n + ix`. Spectral arrays use the same
/// layout, with integer frequency `m` for `m < n/2` and `m − n` otherwise (the
/// Nyquist index maps to `−n/2`).
///
/// Fourier convention: `f̂_k = n⁻² Σ_x f(x) e^{−i k·x}` and
/// `f(x) = Σ_k f̂_k e^{i k·x}`, so `sin x` has `f̂_{(1,0)} = −i/2` and
/// `f̂_{(−1,0)} = i/2`, and `∫ |f|² = L² Σ |f̂_k|²`.
///
/// Cloning is cheap; FFT plans are shared behind an `Arc`.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

struct GridInner {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    padded: OnceLock<Grid>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("length", &self.0.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.0.n == other.0.n && self.0.length == other.0.length
    }
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self, SpectralError> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SpectralError::InvalidGrid(format!(
                "n must be even and at least 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "period length must be positive and finite, got {length}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Grid(Arc::new(GridInner {
            n,
            length,
            forward,
            inverse,
            padded: OnceLock::new(),
        })))
    }

    /// The `[0, 2π)²` torus.
    pub fn periodic_square(n: usize) -> Result<Self, SpectralError> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn length(&self) -> f64 {
        self.0.length
    }

    /// Number of samples, `n²`.
    pub fn len(&self) -> usize {
        self.0.n * self.0.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample spacing `h = L/n`.
    pub fn spacing(&self) -> f64 {
        self.0.length / self.0.n as f64
    }

    /// Area of the periodic cell, `L²`.
    pub fn area(&self) -> f64 {
        self.0.length * self.0.length
    }

    /// Fundamental wavenumber `2π/L`.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.0.length
    }

    /// Signed integer frequency stored at array index `m` along one axis.
    pub fn freq(&self, m: usize) -> i64 {
        let n = self.0.n as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Integer frequency pair `(k₁, k₂)` at flat index `idx`.
    pub fn freq_pair(&self, idx: usize) -> (i64, i64) {
        let n = self.0.n;
        (self.freq(idx % n), self.freq(idx / n))
    }

    /// Physical wavevector `(k₁, k₂)` at flat index `idx`.
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        let (a, b) = self.freq_pair(idx);
        let kb = self.base_wavenumber();
        (a as f64 * kb, b as f64 * kb)
    }

    /// `|k|²` at flat index `idx`.
    pub fn k_squared(&self, idx: usize) -> f64 {
        let (k1, k2) = self.wavevector(idx);
        k1 * k1 + k2 * k2
    }

    /// True for the Nyquist row or column, where first derivatives are zeroed.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let n = self.0.n;
        idx % n == n / 2 || idx / n == n / 2
    }

    /// Flat index of integer frequency `(k₁, k₂)`, if representable.
    pub fn index_of(&self, k1: i64, k2: i64) -> Option<usize> {
        let n = self.0.n as i64;
        let wrap = |k: i64| -> Option<usize> {
            if k >= -(n / 2) && k < n / 2 {
                Some(k.rem_euclid(n) as usize)
            } else {
                None
            }
        };
        Some(wrap(k2)? * self.0.n + wrap(k1)?)
    }

    /// Largest integer frequency kept by the two-thirds rule.
    ///
    /// Retained modes satisfy `3|kᵢ| < n` on both axes, so quadratic products of
    /// retained modes never alias back into the retained band.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.0.n as i64 - 1) / 3
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        let (a, b) = self.freq_pair(idx);
        let c = self.dealias_cutoff();
        a.abs() <= c && b.abs() <= c
    }

    /// Largest `|k|` over all grid modes.
    pub fn max_wavenumber(&self) -> f64 {
        let half = (self.0.n / 2) as f64 * self.base_wavenumber();
        half * std::f64::consts::SQRT_2
    }

    /// Coordinate of sample `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// The same torus at twice the resolution, used for zero-padded quadrature.
    pub fn padded(&self) -> &Grid {
        self.0
            .padded
            .get_or_init(|| Grid::new(2 * self.0.n, self.0.length).expect("doubling a valid grid"))
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<(), SpectralError> {
        if len != self.len() {
            return Err(SpectralError::SizeMismatch {
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }

    /// Physical samples to spectral coefficients.
    pub fn forward(&self, physical: &[f64]) -> Result<Vec<Complex64>, SpectralError> {
        self.check_len(physical.len())?;
        let mut data: Vec<Complex64> = physical.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_2d(&mut data, &self.0.forward);
        let scale = 1.0 / self.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        Ok(data)
    }

    /// Spectral coefficients to physical samples (real part).
    pub fn inverse(&self, coeffs: &[Complex64]) -> Result<Vec<f64>, SpectralError> {
        self.check_len(coeffs.len())?;
        let mut data = coeffs.to_vec();
        self.transform_2d(&mut data, &self.0.inverse);
        Ok(data.into_iter().map(|c| c.re).collect())
    }

    fn transform_2d(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.0.n;
        let scratch_len = plan.get_inplace_scratch_len();
        let init = || vec![Complex64::new(0.0, 0.0); scratch_len];
        let rows = |scratch: &mut Vec<Complex64>, row: &mut [Complex64]| {
            plan.process_with_scratch(row, scratch)
        };
        par::for_each_chunk_with(data, n, init, rows);
        let mut t = vec![Complex64::new(0.0, 0.0); n * n];
        transpose(data, &mut t, n);
        par::for_each_chunk_with(&mut t, n, init, rows);
        transpose(&t, data, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    par::fill_indexed(dst, |i| {
        let (r, c) = (i / n, i % n);
        src[c * n + r]
    });
}
