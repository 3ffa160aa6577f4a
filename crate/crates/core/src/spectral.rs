//! Exact spectral operators: derivatives, Leray projection, the smooth
//! frequency cutoff `P_N` and dealiased pointwise products.

use num_complex::Complex64;

use crate::error::{AnsError, Result};
use crate::field::{SpectralField, VectorField};

/// `i^n` for a non-negative integer `n`.
#[inline]
pub(crate) fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `∂^β f`: multiplies by `(iξ1)^β1 (iξ2)^β2 (iξ3)^β3`.
pub fn apply_derivative(f: &SpectralField, beta: [u32; 3]) -> SpectralField {
    if beta == [0, 0, 0] {
        return f.clone();
    }
    let phase = i_pow(beta[0] + beta[1] + beta[2]);
    f.map_symbol(|xi| {
        let mag = xi[0].powi(beta[0] as i32) * xi[1].powi(beta[1] as i32) * xi[2].powi(beta[2] as i32);
        phase * mag
    })
}

/// Orthogonal projection onto divergence-free fields, `û − ξ(ξ·û)/|ξ|²`.
/// The zero mode is left unchanged.
pub fn leray_project(u: &VectorField) -> VectorField {
    let mut out = u.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(u: &mut VectorField) {
    let grid = *u.grid();
    let k = [grid.wavenumbers(0), grid.wavenumbers(1), grid.wavenumbers(2)];
    let (n0, n1, n2) = grid.shape();
    let [a, b, c] = u.components_mut();
    let (a, b, c) = (a.data_mut(), b.data_mut(), c.data_mut());
    for i in 0..n0 {
        for j in 0..n1 {
            for l in 0..n2 {
                let xi = [k[0][i], k[1][j], k[2][l]];
                let norm2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                if norm2 == 0.0 {
                    continue;
                }
                let idx = (i * n1 + j) * n2 + l;
                let dot = (a[idx] * xi[0] + b[idx] * xi[1] + c[idx] * xi[2]) / norm2;
                a[idx] -= dot * xi[0];
                b[idx] -= dot * xi[1];
                c[idx] -= dot * xi[2];
            }
        }
    }
}

/// Smooth radial cutoff profile: `χ(ρ) = 1` for `ρ ≤ 1`, `0` for `ρ ≥ 2`,
/// and a `C^∞` monotone ramp in between.
pub fn cutoff_profile(rho: f64) -> f64 {
    if rho <= 1.0 {
        1.0
    } else if rho >= 2.0 {
        0.0
    } else {
        let up = flat_exp(2.0 - rho);
        let down = flat_exp(rho - 1.0);
        up / (up + down)
    }
}

#[inline]
fn flat_exp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn check_cutoff(n: f64) -> Result<()> {
    if n.is_nan() || n <= 0.0 {
        return Err(AnsError::Domain(format!(
            "cutoff radius must be positive, got {n}"
        )));
    }
    Ok(())
}

/// `P_N f`: multiplies by `χ(|ξ|/N)`. `N = ∞` is the identity.
pub fn frequency_cutoff_scalar(f: &SpectralField, n: f64) -> Result<SpectralField> {
    check_cutoff(n)?;
    if n.is_infinite() {
        return Ok(f.clone());
    }
    let mut out = f.clone();
    out.apply_real_symbol(|xi| {
        cutoff_profile((xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt() / n)
    });
    Ok(out)
}

pub fn frequency_cutoff(u: &VectorField, n: f64) -> Result<VectorField> {
    check_cutoff(n)?;
    let mut out = u.clone();
    frequency_cutoff_in_place(&mut out, n);
    Ok(out)
}

pub(crate) fn frequency_cutoff_in_place(u: &mut VectorField, n: f64) {
    if n.is_infinite() {
        return;
    }
    for c in u.components_mut() {
        c.apply_real_symbol(|xi| {
            cutoff_profile((xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt() / n)
        });
    }
}

/// Grid proxy for `‖ℱ⁻¹χ(·/N)‖_{L¹}`: the `L¹` norm over the box of the
/// periodic kernel with coefficients `χ(|ξ|/N)/|box|`.
pub fn cutoff_kernel_l1(grid: crate::grid::Grid, n: f64) -> Result<f64> {
    check_cutoff(n)?;
    let mut kernel = SpectralField::zeros(grid);
    let vol = grid.volume();
    for c in kernel.data_mut() {
        *c = Complex64::new(1.0 / vol, 0.0);
    }
    let kernel = frequency_cutoff_scalar(&kernel, n)?;
    Ok(kernel.lp_norm(1.0))
}

/// Physical-space product of two real fields, dealiased on the shared grid.
pub fn pointwise_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let grid = *f.grid();
    let a = f.to_physical();
    let b = g.to_physical();
    let prod = &a * &b;
    let mut out = SpectralField::from_physical(grid, &prod)?;
    out.dealias();
    out.symmetrize_hermitian();
    Ok(out)
}
