use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::{Grid, SpectralError};
use crate::par;

/// Real periodic scalar field held as spectral coefficients.
///
/// The physical samples are computed on first request and cached. A field
/// built with [`ScalarField::from_physical`] keeps the exact samples it was
/// given, so physical-space I/O round-trips bit for bit.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    physical: OnceLock<Vec<f64>>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        Self::from_coeffs_unchecked(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        coeffs[0] = Complex64::new(value, 0.0);
        Self::from_coeffs_unchecked(grid, coeffs)
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        grid.check_len(coeffs.len())?;
        Ok(Self::from_coeffs_unchecked(grid, coeffs))
    }

    pub(crate) fn from_coeffs_unchecked(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        ScalarField {
            grid: grid.clone(),
            coeffs,
            physical: OnceLock::new(),
        }
    }

    pub fn from_physical(grid: &Grid, values: Vec<f64>) -> Result<Self, SpectralError> {
        let coeffs = grid.forward(&values)?;
        let physical = OnceLock::new();
        let _ = physical.set(values);
        Ok(ScalarField {
            grid: grid.clone(),
            coeffs,
            physical,
        })
    }

    /// Samples `f(x, y)` on the grid.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let mut values = vec![0.0; grid.len()];
        par::fill_indexed(&mut values, |i| f((i % n) as f64 * h, (i / n) as f64 * h));
        Self::from_physical(grid, values).expect("sized from grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Physical samples, row-major with `y` as the row index.
    pub fn physical(&self) -> &[f64] {
        self.physical
            .get_or_init(|| self.grid.inverse(&self.coeffs).expect("sized from grid"))
    }

    /// Spatial average (the zero mode).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Applies `m(idx, ĉ)` to every coefficient.
    pub fn map_modes(&self, m: impl Fn(usize, Complex64) -> Complex64 + Sync + Send) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let src = &self.coeffs;
        par::fill_indexed(&mut out, |i| m(i, src[i]));
        Self::from_coeffs_unchecked(&self.grid, out)
    }

    /// Combines two fields mode by mode.
    pub fn zip_modes(
        &self,
        other: &ScalarField,
        m: impl Fn(usize, Complex64, Complex64) -> Complex64 + Sync + Send,
    ) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let (a, b) = (&self.coeffs, &other.coeffs);
        par::fill_indexed(&mut out, |i| m(i, a[i], b[i]));
        Self::from_coeffs_unchecked(&self.grid, out)
    }

    /// `L²` inner product `∫ f g`, evaluated exactly from coefficients.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        s * self.grid.area()
    }

    /// `‖f‖_{L²}` via Parseval.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.area()).sqrt()
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Samples on the twice-refined grid by zero padding the spectrum.
    pub fn padded_physical(&self) -> Vec<f64> {
        let fine = self.grid.padded();
        let mut big = vec![Complex64::new(0.0, 0.0); fine.len()];
        for (idx, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (a, b) = self.grid.freq_pair(idx);
            let j = fine.index_of(a, b).expect("coarse modes fit on the padded grid");
            big[j] = *c;
        }
        fine.inverse(&big).expect("sized from grid")
    }

    /// `‖f‖_{L∞}` on the zero-padded grid.
    pub fn max_abs(&self) -> f64 {
        self.padded_physical().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_modes(|_, c| c * s)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Self {
        self.zip_modes(other, |_, a, b| a + b * s)
    }

    /// Replaces the zero mode with zero.
    pub fn without_mean(&self) -> Self {
        if self.coeffs[0] == Complex64::new(0.0, 0.0) {
            return self.clone();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = Complex64::new(0.0, 0.0);
        Self::from_coeffs_unchecked(&self.grid, coeffs)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_modes(rhs, |_, a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_modes(rhs, |_, a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

/// Planar vector field `(v₁, v₂)`.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Self {
        assert_eq!(x.grid(), y.grid(), "components live on different grids");
        VectorField { x, y }
    }

    pub fn zeros(grid: &Grid) -> Self {
        VectorField::new(ScalarField::zeros(grid), ScalarField::zeros(grid))
    }

    pub fn grid(&self) -> &Grid {
        self.x.grid()
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        self.x.inner(&other.x) + self.y.inner(&other.y)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// Pointwise Euclidean `L∞` norm on the padded grid.
    pub fn max_abs(&self) -> f64 {
        let (a, b) = (self.x.padded_physical(), self.y.padded_physical());
        a.iter()
            .zip(&b)
            .map(|(p, q)| p.hypot(*q))
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        VectorField::new(f(&self.x), f(&self.y))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn add(&self, other: &VectorField) -> Self {
        VectorField::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        VectorField::new(&self.x - &other.x, &self.y - &other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Symmetric 2×2 tensor field; `τ₂₁ ≡ τ₁₂` is never stored.
#[derive(Clone, Debug)]
pub struct SymTensorField {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl SymTensorField {
    pub fn new(xx: ScalarField, xy: ScalarField, yy: ScalarField) -> Self {
        assert!(
            xx.grid() == xy.grid() && xy.grid() == yy.grid(),
            "components live on different grids"
        );
        SymTensorField { xx, xy, yy }
    }

    pub fn zeros(grid: &Grid) -> Self {
        SymTensorField::new(
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
        )
    }

    /// `c·I` with `c` constant.
    pub fn scaled_identity(grid: &Grid, c: f64) -> Self {
        SymTensorField::new(
            ScalarField::constant(grid, c),
            ScalarField::zeros(grid),
            ScalarField::constant(grid, c),
        )
    }

    pub fn grid(&self) -> &Grid {
        self.xx.grid()
    }

    pub fn components(&self) -> [&ScalarField; 3] {
        [&self.xx, &self.xy, &self.yy]
    }

    /// Frobenius pairing `∫ a : b`, counting the off-diagonal entry twice.
    pub fn inner(&self, other: &SymTensorField) -> f64 {
        self.xx.inner(&other.xx) + 2.0 * self.xy.inner(&other.xy) + self.yy.inner(&other.yy)
    }

    /// Frobenius `L²` norm.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// Euclidean norm of the stored triple `(τ₁₁, τ₁₂, τ₂₂)`.
    pub fn component_l2_norm(&self) -> f64 {
        let s = self.xx.inner(&self.xx) + self.xy.inner(&self.xy) + self.yy.inner(&self.yy);
        s.max(0.0).sqrt()
    }

    /// Pointwise Frobenius `L∞` norm on the padded grid.
    pub fn max_abs(&self) -> f64 {
        let (a, b, c) = (
            self.xx.padded_physical(),
            self.xy.padded_physical(),
            self.yy.padded_physical(),
        );
        (0..a.len())
            .map(|i| (a[i] * a[i] + 2.0 * b[i] * b[i] + c[i] * c[i]).sqrt())
            .fold(0.0, f64::max)
    }

    /// Pointwise trace.
    pub fn trace(&self) -> ScalarField {
        &self.xx + &self.yy
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        SymTensorField::new(f(&self.xx), f(&self.xy), f(&self.yy))
    }

    pub fn zip(
        &self,
        other: &SymTensorField,
        f: impl Fn(&ScalarField, &ScalarField) -> ScalarField,
    ) -> Self {
        SymTensorField::new(
            f(&self.xx, &other.xx),
            f(&self.xy, &other.xy),
            f(&self.yy, &other.yy),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn add(&self, other: &SymTensorField) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymTensorField) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn axpy(&self, s: f64, other: &SymTensorField) -> Self {
        self.zip(other, |a, b| a.axpy(s, b))
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }
}

/// Velocity gradient with `(∇u)ᵢⱼ = ∂ᵢuⱼ`.
///
/// Under this convention the skew part `Ω = ½(∇u − ∇uᵀ)` has
/// `Ω₁₂ = ½(∂₁u₂ − ∂₂u₁) = ω/2`.
#[derive(Clone, Debug)]
pub struct VelocityGradient {
    pub d1u1: ScalarField,
    pub d2u1: ScalarField,
    pub d1u2: ScalarField,
    pub d2u2: ScalarField,
}

impl VelocityGradient {
    pub fn grid(&self) -> &Grid {
        self.d1u1.grid()
    }

    /// `‖∇u‖²_{L²} = Σᵢⱼ ‖∂ⱼuᵢ‖²`.
    pub fn l2_norm_sqr(&self) -> f64 {
        [&self.d1u1, &self.d2u1, &self.d1u2, &self.d2u2]
            .iter()
            .map(|f| f.inner(f))
            .sum()
    }

    /// Pointwise Frobenius `L∞` norm on the padded grid.
    pub fn max_abs(&self) -> f64 {
        let comps = [
            self.d1u1.padded_physical(),
            self.d2u1.padded_physical(),
            self.d1u2.padded_physical(),
            self.d2u2.padded_physical(),
        ];
        (0..comps[0].len())
            .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::periodic_square(n).unwrap()
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = grid(16);
        let f = ScalarField::from_fn(&g, |_, _| 2.5);
        assert!((f.coeffs()[0].re - 2.5).abs() < 1e-14);
        for c in &f.coeffs()[1..] {
            assert!(c.norm() < 1e-14);
        }
    }

    #[test]
    fn sine_coefficients_follow_documented_convention() {
        let g = grid(16);
        let f = ScalarField::from_fn(&g, |x, _| x.sin());
        let plus = f.coeffs()[g.index_of(1, 0).unwrap()];
        let minus = f.coeffs()[g.index_of(-1, 0).unwrap()];
        assert!((plus - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((minus - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        let others: f64 = f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != g.index_of(1, 0).unwrap() && *i != g.index_of(-1, 0).unwrap())
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(others < 1e-15);
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = grid(32);
        let f = ScalarField::from_fn(&g, |x, y| (x + 2.0 * y).sin() + 0.3 * (3.0 * x).cos());
        let quad: f64 = f.physical().iter().map(|v| v * v).sum::<f64>() * g.spacing().powi(2);
        let rel = (f.l2_norm().powi(2) - quad).abs() / quad;
        assert!(rel < 1e-12, "{rel}");
        assert!((f.l2_norm() - (2.0 * PI * PI + 0.09 * 2.0 * PI * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn from_physical_keeps_exact_samples() {
        let g = grid(8);
        let values: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let f = ScalarField::from_physical(&g, values.clone()).unwrap();
        assert_eq!(f.physical(), &values[..]);
    }

    #[test]
    fn padded_max_resolves_peak() {
        let g = grid(16);
        // Peak of cos(x - h/2) falls between coarse samples.
        let h = g.spacing();
        let f = ScalarField::from_fn(&g, |x, _| (x - 0.5 * h).cos());
        let coarse = f.physical().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(coarse < 0.999);
        assert!((f.max_abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_frobenius_counts_offdiagonal_twice() {
        let g = grid(8);
        let one = ScalarField::constant(&g, 1.0);
        let t = SymTensorField::new(ScalarField::zeros(&g), one, ScalarField::zeros(&g));
        let area = g.area();
        assert!((t.l2_norm().powi(2) - 2.0 * area).abs() < 1e-10);
        assert!((t.component_l2_norm().powi(2) - area).abs() < 1e-10);
        assert!((t.max_abs() - 2f64.sqrt()).abs() < 1e-12);
    }
}
