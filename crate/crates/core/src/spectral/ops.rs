//! Exact Fourier-multiplier operators on the periodic square.
//!
//! Inverse operators (`Δ⁻¹`, `|D|⁻¹`, `R`) send the zero mode to zero. First
//! derivatives vanish on the Nyquist lines, where no real multiplier `ik`
//! exists; fields produced by the dealiased dynamics never populate them.

use num_complex::Complex64;

use super::{Grid, ScalarField, SpectralError, SymTensorField, VectorField, VelocityGradient};
use crate::par;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative tolerance for treating a vorticity mean as zero.
const MEAN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

fn first_derivative_symbol(grid: &Grid, idx: usize, axis: Axis) -> Complex64 {
    if grid.is_nyquist(idx) {
        return ZERO;
    }
    let (k1, k2) = grid.wavevector(idx);
    match axis {
        Axis::X => I * k1,
        Axis::Y => I * k2,
    }
}

/// `∂_axis f`.
pub fn deriv(f: &ScalarField, axis: Axis) -> ScalarField {
    let g = f.grid().clone();
    f.map_modes(move |i, c| c * first_derivative_symbol(&g, i, axis))
}

/// `Δf`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid().clone();
    f.map_modes(move |i, c| c * -g.k_squared(i))
}

/// Solves `Δψ = f − mean(f)` for the zero-mean `ψ`. The mean of `f` is
/// discarded, so the operation is total.
pub fn invert_laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid().clone();
    f.map_modes(move |i, c| if i == 0 { ZERO } else { c * (-1.0 / g.k_squared(i)) })
}

pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField::new(deriv(f, Axis::X), deriv(f, Axis::Y))
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let g = v.grid().clone();
    v.x.zip_modes(&v.y, move |i, a, b| {
        a * first_derivative_symbol(&g, i, Axis::X) + b * first_derivative_symbol(&g, i, Axis::Y)
    })
}

/// Scalar curl `∂₁v₂ − ∂₂v₁`.
pub fn curl(v: &VectorField) -> ScalarField {
    let g = v.grid().clone();
    v.x.zip_modes(&v.y, move |i, a, b| {
        b * first_derivative_symbol(&g, i, Axis::X) - a * first_derivative_symbol(&g, i, Axis::Y)
    })
}

/// Largest per-mode `|k·v̂|`, the discrete divergence defect.
pub fn max_mode_divergence(v: &VectorField) -> f64 {
    let g = v.grid();
    (0..g.len())
        .map(|i| {
            let (k1, k2) = g.wavevector(i);
            (v.x.coeffs()[i] * k1 + v.y.coeffs()[i] * k2).norm()
        })
        .fold(0.0, f64::max)
}

/// Orthogonal projection onto divergence-free fields. The mean flow is kept.
pub fn leray_project(v: &VectorField) -> VectorField {
    let g = v.grid();
    let n = g.len();
    let mut px = vec![ZERO; n];
    let mut py = vec![ZERO; n];
    for i in 1..n {
        let (k1, k2) = g.wavevector(i);
        let ksq = k1 * k1 + k2 * k2;
        let (a, b) = (v.x.coeffs()[i], v.y.coeffs()[i]);
        let kv = (a * k1 + b * k2) / ksq;
        px[i] = a - kv * k1;
        py[i] = b - kv * k2;
    }
    px[0] = v.x.coeffs()[0];
    py[0] = v.y.coeffs()[0];
    VectorField::new(
        ScalarField::from_coeffs_unchecked(g, px),
        ScalarField::from_coeffs_unchecked(g, py),
    )
}

/// Velocity from vorticity: `û = (ik₂, −ik₁) ω̂ / |k|²`.
///
/// The output is divergence-free with zero mean and `curl u = ω`. A vorticity
/// with nonzero mean has no periodic velocity and is rejected.
pub fn biot_savart(omega: &ScalarField) -> Result<VectorField, SpectralError> {
    let mean = omega.mean();
    if mean.abs() > MEAN_TOLERANCE * (1.0 + omega.max_coeff()) {
        return Err(SpectralError::NonzeroMean(mean));
    }
    let g = omega.grid().clone();
    let g2 = g.clone();
    let u1 = omega.map_modes(move |i, c| {
        if i == 0 {
            ZERO
        } else {
            c * first_derivative_symbol(&g, i, Axis::Y) / g.k_squared(i)
        }
    });
    let u2 = omega.map_modes(move |i, c| {
        if i == 0 {
            ZERO
        } else {
            -c * first_derivative_symbol(&g2, i, Axis::X) / g2.k_squared(i)
        }
    });
    Ok(VectorField::new(u1, u2))
}

pub fn velocity_gradient(u: &VectorField) -> VelocityGradient {
    VelocityGradient {
        d1u1: deriv(&u.x, Axis::X),
        d2u1: deriv(&u.x, Axis::Y),
        d1u2: deriv(&u.y, Axis::X),
        d2u2: deriv(&u.y, Axis::Y),
    }
}

/// `Du = ½(∇u + ∇uᵀ)`.
pub fn sym_grad(u: &VectorField) -> SymTensorField {
    sym_part(&velocity_gradient(u))
}

pub fn sym_part(grad: &VelocityGradient) -> SymTensorField {
    SymTensorField::new(
        grad.d1u1.clone(),
        (&grad.d1u2 + &grad.d2u1).scale(0.5),
        grad.d2u2.clone(),
    )
}

/// Symbol of `R = Δ⁻¹ curl div` on `(τ₁₁, τ₁₂, τ₂₂)`.
pub fn riesz_r_symbol(k1: f64, k2: f64) -> [f64; 3] {
    let ksq = k1 * k1 + k2 * k2;
    if ksq == 0.0 {
        return [0.0; 3];
    }
    [-k1 * k2 / ksq, (k1 * k1 - k2 * k2) / ksq, k1 * k2 / ksq]
}

/// `R̂τ = [(k₁² − k₂²) τ̂₁₂ + k₁k₂ (τ̂₂₂ − τ̂₁₁)] / |k|²`, zero mode to zero.
pub fn riesz_r(tau: &SymTensorField) -> ScalarField {
    let g = tau.grid();
    let mut out = vec![ZERO; g.len()];
    let (a, b, c) = (tau.xx.coeffs(), tau.xy.coeffs(), tau.yy.coeffs());
    par::fill_indexed(&mut out, |i| {
        let (k1, k2) = g.wavevector(i);
        let [s11, s12, s22] = riesz_r_symbol(k1, k2);
        a[i] * s11 + b[i] * s12 + c[i] * s22
    });
    ScalarField::from_coeffs_unchecked(g, out)
}

/// `curl div τ`, per mode `−[(k₁² − k₂²) τ̂₁₂ + k₁k₂ (τ̂₂₂ − τ̂₁₁)]`.
pub fn curl_div(tau: &SymTensorField) -> ScalarField {
    let g = tau.grid();
    let mut out = vec![ZERO; g.len()];
    let (a, b, c) = (tau.xx.coeffs(), tau.xy.coeffs(), tau.yy.coeffs());
    par::fill_indexed(&mut out, |i| {
        let (k1, k2) = g.wavevector(i);
        -((b[i] * (k1 * k1 - k2 * k2)) + (c[i] - a[i]) * (k1 * k2))
    });
    ScalarField::from_coeffs_unchecked(g, out)
}

/// Row-wise divergence `(div τ)ᵢ = ∂ⱼτᵢⱼ`.
pub fn div_tensor(tau: &SymTensorField) -> VectorField {
    VectorField::new(
        &deriv(&tau.xx, Axis::X) + &deriv(&tau.xy, Axis::Y),
        &deriv(&tau.xy, Axis::X) + &deriv(&tau.yy, Axis::Y),
    )
}

/// `ℛᵢ = ∂ᵢ/|D|`, per mode `i kᵢ / |k|`.
pub fn riesz_component(f: &ScalarField, axis: Axis) -> ScalarField {
    let g = f.grid().clone();
    f.map_modes(move |i, c| {
        if i == 0 {
            ZERO
        } else {
            c * first_derivative_symbol(&g, i, axis) / g.k_squared(i).sqrt()
        }
    })
}

/// Two-thirds rule: zeroes every mode with `3|kᵢ| ≥ n` on either axis.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let g = f.grid().clone();
    f.map_modes(move |i, c| if g.is_retained(i) { c } else { ZERO })
}

/// Builds a field from pointwise physical values, then dealiases it.
pub fn dealiased_from_pointwise(grid: &Grid, value: impl Fn(usize) -> f64 + Sync + Send) -> ScalarField {
    let mut values = vec![0.0; grid.len()];
    par::fill_indexed(&mut values, value);
    let raw = ScalarField::from_physical(grid, values).expect("sized from grid");
    dealias(&raw)
}

/// Dealiased pointwise product `a·b`.
pub fn product(a: &ScalarField, b: &ScalarField) -> ScalarField {
    assert_eq!(a.grid(), b.grid(), "fields live on different grids");
    let (pa, pb) = (a.physical(), b.physical());
    dealiased_from_pointwise(a.grid(), |i| pa[i] * pb[i])
}

/// Dealiased advection `u·∇f`.
pub fn advect(u: &VectorField, f: &ScalarField) -> ScalarField {
    let fx = deriv(f, Axis::X);
    let fy = deriv(f, Axis::Y);
    let (u1, u2) = (u.x.physical(), u.y.physical());
    let (g1, g2) = (fx.physical(), fy.physical());
    dealiased_from_pointwise(f.grid(), |i| u1[i] * g1[i] + u2[i] * g2[i])
}

/// Component-wise dealiased advection `u·∇τ`.
pub fn advect_tensor(u: &VectorField, tau: &SymTensorField) -> SymTensorField {
    tau.map(|c| advect(u, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::periodic_square(n).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.physical()
            .iter()
            .zip(b.physical())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn derivative_examples() {
        let g = grid(16);
        let s = ScalarField::from_fn(&g, |x, _| x.sin());
        let c = ScalarField::from_fn(&g, |x, _| x.cos());
        assert!(max_diff(&deriv(&s, Axis::X), &c) < 1e-14);
        let s3 = ScalarField::from_fn(&g, |_, y| (3.0 * y).sin());
        let c3 = ScalarField::from_fn(&g, |_, y| 3.0 * (3.0 * y).cos());
        assert!(max_diff(&deriv(&s3, Axis::Y), &c3) < 1e-13);
        let k = ScalarField::constant(&g, 4.0);
        assert!(deriv(&k, Axis::X).max_coeff() == 0.0);
    }

    #[test]
    fn inverse_laplacian_examples() {
        let g = grid(16);
        let s = ScalarField::from_fn(&g, |x, _| x.sin());
        assert!(max_diff(&invert_laplacian(&s), &s.scale(-1.0)) < 1e-14);
        let s2 = ScalarField::from_fn(&g, |x, _| (2.0 * x).sin());
        assert!(max_diff(&invert_laplacian(&s2), &s2.scale(-0.25)) < 1e-14);
        assert_eq!(invert_laplacian(&ScalarField::constant(&g, 3.0)).max_coeff(), 0.0);
    }

    #[test]
    fn leray_examples() {
        let g = grid(16);
        let phi = ScalarField::from_fn(&g, |x, y| (x + y).sin());
        let p = leray_project(&gradient(&phi));
        assert!(p.x.max_coeff() < 1e-15 && p.y.max_coeff() < 1e-15);
        let v = VectorField::new(ScalarField::from_fn(&g, |_, y| y.sin()), ScalarField::zeros(&g));
        let pv = leray_project(&v);
        assert!(max_diff(&pv.x, &v.x) < 1e-15 && pv.y.max_coeff() < 1e-15);
    }

    #[test]
    fn biot_savart_examples() {
        let g = grid(16);
        let u = biot_savart(&ScalarField::from_fn(&g, |x, _| x.sin())).unwrap();
        assert!(u.x.max_coeff() < 1e-15);
        assert!(max_diff(&u.y, &ScalarField::from_fn(&g, |x, _| -x.cos())) < 1e-14);
        let u = biot_savart(&ScalarField::from_fn(&g, |_, y| y.sin())).unwrap();
        assert!(max_diff(&u.x, &ScalarField::from_fn(&g, |_, y| y.cos())) < 1e-14);
        assert!(u.y.max_coeff() < 1e-15);
        let z = biot_savart(&ScalarField::zeros(&g)).unwrap();
        assert_eq!(z.x.max_coeff() + z.y.max_coeff(), 0.0);
    }

    #[test]
    fn biot_savart_rejects_mean() {
        let g = grid(8);
        let err = biot_savart(&ScalarField::constant(&g, 1.0)).unwrap_err();
        assert!(matches!(err, SpectralError::NonzeroMean(m) if m == 1.0));
    }

    #[test]
    fn sym_grad_examples() {
        let g = grid(16);
        let u = VectorField::new(ScalarField::zeros(&g), ScalarField::from_fn(&g, |x, _| -x.cos()));
        let du = sym_grad(&u);
        assert!(du.xx.max_coeff() < 1e-15 && du.yy.max_coeff() < 1e-15);
        assert!(max_diff(&du.xy, &ScalarField::from_fn(&g, |x, _| 0.5 * x.sin())) < 1e-14);

        let u = VectorField::new(
            ScalarField::from_fn(&g, |_, y| y.sin()),
            ScalarField::from_fn(&g, |x, _| x.sin()),
        );
        let du = sym_grad(&u);
        let expect = ScalarField::from_fn(&g, |x, y| 0.5 * (x.cos() + y.cos()));
        assert!(max_diff(&du.xy, &expect) < 1e-14);

        let c = VectorField::new(ScalarField::constant(&g, 1.0), ScalarField::constant(&g, -2.0));
        let du = sym_grad(&c);
        assert_eq!(du.xx.max_coeff() + du.xy.max_coeff() + du.yy.max_coeff(), 0.0);
    }

    #[test]
    fn riesz_r_examples() {
        let g = grid(16);
        let cosx = ScalarField::from_fn(&g, |x, _| x.cos());
        let z = ScalarField::zeros(&g);
        let t12 = SymTensorField::new(z.clone(), cosx.clone(), z.clone());
        assert!(max_diff(&riesz_r(&t12), &cosx) < 1e-14);
        let t11 = SymTensorField::new(cosx.clone(), z.clone(), z.clone());
        assert!(riesz_r(&t11).max_coeff() < 1e-15);
        let c = SymTensorField::new(
            ScalarField::constant(&g, 1.0),
            ScalarField::constant(&g, 2.0),
            ScalarField::constant(&g, 3.0),
        );
        assert_eq!(riesz_r(&c).max_coeff(), 0.0);
    }

    #[test]
    fn curl_div_examples() {
        let g = grid(16);
        let cosx = ScalarField::from_fn(&g, |x, _| x.cos());
        let z = ScalarField::zeros(&g);
        let t12 = SymTensorField::new(z.clone(), cosx.clone(), z.clone());
        assert!(max_diff(&curl_div(&t12), &cosx.scale(-1.0)) < 1e-14);
        // Matches curl applied to the row-wise divergence.
        let t = SymTensorField::new(
            ScalarField::from_fn(&g, |x, y| (x + 2.0 * y).sin()),
            ScalarField::from_fn(&g, |x, y| (2.0 * x - y).cos()),
            ScalarField::from_fn(&g, |x, y| (3.0 * y).cos() * x.sin()),
        );
        assert!(max_diff(&curl_div(&t), &curl(&div_tensor(&t))) < 1e-12);
    }

    #[test]
    fn riesz_components_square_to_minus_identity() {
        let g = grid(16);
        let f = ScalarField::from_fn(&g, |x, y| (x + 2.0 * y).sin() + (3.0 * x).cos());
        let r1 = riesz_component(&riesz_component(&f, Axis::X), Axis::X);
        let r2 = riesz_component(&riesz_component(&f, Axis::Y), Axis::Y);
        assert!(max_diff(&(&r1 + &r2), &f.scale(-1.0)) < 1e-14);
        let s = ScalarField::from_fn(&g, |x, _| x.sin());
        assert!(max_diff(&riesz_component(&s, Axis::X), &ScalarField::from_fn(&g, |x, _| x.cos())) < 1e-14);
        assert!(riesz_component(&ScalarField::from_fn(&g, |_, y| y.sin()), Axis::X).max_coeff() < 1e-15);
        assert_eq!(riesz_component(&ScalarField::constant(&g, 2.0), Axis::Y).max_coeff(), 0.0);
    }

    #[test]
    fn dealias_examples() {
        let g = grid(16);
        let high = ScalarField::from_fn(&g, |x, _| (7.0 * x).cos());
        assert!(dealias(&high).max_coeff() < 1e-15);
        let low = ScalarField::from_fn(&g, |x, y| (x + y).cos());
        let d = dealias(&low);
        assert!(max_diff(&d, &low) < 1e-15);
        let twice = dealias(&d);
        assert_eq!(twice.coeffs(), d.coeffs());
    }

    #[test]
    fn product_of_modes() {
        let g = grid(16);
        let a = ScalarField::from_fn(&g, |x, _| x.cos());
        let b = ScalarField::from_fn(&g, |_, y| (2.0 * y).cos());
        let expect = ScalarField::from_fn(&g, |x, y| x.cos() * (2.0 * y).cos());
        assert!(max_diff(&product(&a, &b), &expect) < 1e-14);
        let _ = PI;
    }
}
