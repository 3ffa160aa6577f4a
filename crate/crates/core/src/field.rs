//! Spectral scalar and vector fields bound to a [`Grid`].

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{AnsError, Result};
use crate::fft::Fft3;
use crate::grid::Grid;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Fourier coefficients of a scalar field, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Array3<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: Array3::from_elem(grid.shape(), ZERO),
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Array3<Complex64>) -> Result<Self> {
        if coeffs.dim() != grid.shape() {
            return Err(AnsError::GridMismatch(format!(
                "coefficient array {:?} does not match grid {:?}",
                coeffs.dim(),
                grid.shape()
            )));
        }
        let coeffs = if coeffs.is_standard_layout() {
            coeffs
        } else {
            coeffs.as_standard_layout().to_owned()
        };
        Ok(Self { grid, coeffs })
    }

    pub fn from_physical(grid: Grid, values: &Array3<f64>) -> Result<Self> {
        let complex = values.mapv(|v| Complex64::new(v, 0.0));
        Self::from_physical_complex(grid, complex)
    }

    pub fn from_physical_complex(grid: Grid, values: Array3<Complex64>) -> Result<Self> {
        let mut field = Self::from_coeffs(grid, values)?;
        Fft3::for_shape(grid.n()).forward(field.data_mut());
        Ok(field)
    }

    /// Samples `f(x1, x2, x3)` on the grid and transforms.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let (n0, n1, n2) = grid.shape();
        let values = Array3::from_shape_fn((n0, n1, n2), |(i, j, k)| {
            f(
                grid.coordinate(0, i),
                grid.coordinate(1, j),
                grid.coordinate(2, k),
            )
        });
        Self::from_physical(grid, &values).expect("shape taken from grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array3<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array3<Complex64> {
        self.coeffs
    }

    pub fn data(&self) -> &[Complex64] {
        self.coeffs
            .as_slice()
            .expect("coefficients are kept in standard layout")
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        self.coeffs
            .as_slice_mut()
            .expect("coefficients are kept in standard layout")
    }

    /// Coefficient of the signed mode `m`, zero if it is not representable.
    pub fn mode(&self, m: [i64; 3]) -> Complex64 {
        match self.mode_index(m) {
            Some(idx) => self.coeffs[idx],
            None => ZERO,
        }
    }

    pub fn set_mode(&mut self, m: [i64; 3], value: Complex64) -> Result<()> {
        let idx = self
            .mode_index(m)
            .ok_or_else(|| AnsError::Domain(format!("mode {m:?} is not representable")))?;
        self.coeffs[idx] = value;
        Ok(())
    }

    /// Sets `m` and its mirror `-m` so that the physical field stays real.
    pub fn set_real_mode(&mut self, m: [i64; 3], value: Complex64) -> Result<()> {
        self.set_mode(m, value)?;
        let mirror = [-m[0], -m[1], -m[2]];
        if mirror == m {
            self.set_mode(m, Complex64::new(value.re, 0.0))
        } else {
            self.set_mode(mirror, value.conj())
        }
    }

    fn mode_index(&self, m: [i64; 3]) -> Option<(usize, usize, usize)> {
        Some((
            self.grid.index_of(0, m[0])?,
            self.grid.index_of(1, m[1])?,
            self.grid.index_of(2, m[2])?,
        ))
    }

    /// Multiplies every coefficient by `symbol(ξ)`.
    pub fn map_symbol(&self, symbol: impl Fn([f64; 3]) -> Complex64) -> Self {
        let mut out = self.clone();
        out.apply_symbol(symbol);
        out
    }

    pub fn apply_symbol(&mut self, symbol: impl Fn([f64; 3]) -> Complex64) {
        let grid = self.grid;
        let k0 = grid.wavenumbers(0);
        let k1 = grid.wavenumbers(1);
        let k2 = grid.wavenumbers(2);
        for ((i, j, k), c) in self.coeffs.indexed_iter_mut() {
            *c *= symbol([k0[i], k1[j], k2[k]]);
        }
    }

    /// Multiplies by a real symbol.
    pub fn apply_real_symbol(&mut self, symbol: impl Fn([f64; 3]) -> f64) {
        let grid = self.grid;
        let k0 = grid.wavenumbers(0);
        let k1 = grid.wavenumbers(1);
        let k2 = grid.wavenumbers(2);
        for ((i, j, k), c) in self.coeffs.indexed_iter_mut() {
            *c *= symbol([k0[i], k1[j], k2[k]]);
        }
    }

    pub fn to_physical_complex(&self) -> Array3<Complex64> {
        let mut out = self.coeffs.clone();
        Fft3::for_shape(self.grid.n()).inverse(out.as_slice_mut().expect("standard layout"));
        out
    }

    /// Real part of the physical field.
    pub fn to_physical(&self) -> Array3<f64> {
        self.to_physical_complex().mapv(|c| c.re)
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(AnsError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.mapv_inplace(|c| c * a);
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`; grids must agree.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert!(self.grid.same_shape(&other.grid));
        for (x, y) in self.data_mut().iter_mut().zip(other.data()) {
            *x += y * a;
        }
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data().iter().all(|c| *c == ZERO)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.data().iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|c(ξ) - conj(c(-ξ))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for ((i, j, k), c) in self.coeffs.indexed_iter() {
            let mirror = self.coeffs[(
                g.mirror_index(0, i),
                g.mirror_index(1, j),
                g.mirror_index(2, k),
            )];
            worst = worst.max((c - mirror.conj()).norm());
        }
        worst
    }

    /// Replaces the coefficients by their Hermitian part.
    pub fn symmetrize_hermitian(&mut self) {
        let g = self.grid;
        let src = self.coeffs.clone();
        for ((i, j, k), c) in self.coeffs.indexed_iter_mut() {
            let mirror = src[(
                g.mirror_index(0, i),
                g.mirror_index(1, j),
                g.mirror_index(2, k),
            )];
            *c = (src[(i, j, k)] + mirror.conj()) * 0.5;
        }
    }

    /// Zeroes every coefficient outside the dealiasing window.
    pub fn dealias(&mut self) {
        let g = self.grid;
        let lim = [g.dealias_limit(0), g.dealias_limit(1), g.dealias_limit(2)];
        for ((i, j, k), c) in self.coeffs.indexed_iter_mut() {
            if g.mode(0, i).abs() > lim[0] || g.mode(1, j).abs() > lim[1] || g.mode(2, k).abs() > lim[2]
            {
                *c = ZERO;
            }
        }
    }

    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.dealias();
        out
    }

    /// Sum of `|c|²`.
    pub fn coefficient_energy(&self) -> f64 {
        self.data().iter().map(|c| c.norm_sqr()).sum()
    }

    /// `L²` norm over the box through Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coefficient_energy()).sqrt()
    }

    /// `L^p` norm over the box by rectangle quadrature of the physical samples.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_of_samples(&[self.to_physical_complex()], p, self.grid.cell_volume())
    }
}

/// `L^p` norm of the pointwise Euclidean magnitude of several complex sample
/// arrays (one per component) under rectangle quadrature.
pub fn lp_norm_of_samples(components: &[Array3<Complex64>], p: f64, cell_volume: f64) -> f64 {
    let Some(first) = components.first() else {
        return 0.0;
    };
    let len = first.len();
    let slices: Vec<&[Complex64]> = components
        .iter()
        .map(|c| c.as_slice().expect("standard layout"))
        .collect();
    let magnitude_sq = |idx: usize| slices.iter().map(|s| s[idx].norm_sqr()).sum::<f64>();
    if p.is_infinite() {
        (0..len).fold(0.0f64, |m, idx| m.max(magnitude_sq(idx))).sqrt()
    } else if p == 2.0 {
        ((0..len).map(magnitude_sq).sum::<f64>() * cell_volume).sqrt()
    } else if p == 1.0 {
        (0..len).map(|idx| magnitude_sq(idx).sqrt()).sum::<f64>() * cell_volume
    } else {
        let sum: f64 = (0..len).map(|idx| magnitude_sq(idx).powf(p / 2.0)).sum();
        (sum * cell_volume).powf(1.0 / p)
    }
}

/// Three-component velocity-like field sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: [SpectralField; 3],
}

impl VectorField {
    pub fn new(u1: SpectralField, u2: SpectralField, u3: SpectralField) -> Result<Self> {
        u1.check_same_grid(&u2)?;
        u1.check_same_grid(&u3)?;
        Ok(Self {
            components: [u1, u2, u3],
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        let z = SpectralField::zeros(grid);
        Self {
            components: [z.clone(), z.clone(), z],
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut SpectralField {
        &mut self.components[i]
    }

    pub fn components(&self) -> &[SpectralField; 3] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [SpectralField; 3] {
        &mut self.components
    }

    pub fn into_components(self) -> [SpectralField; 3] {
        self.components
    }

    /// Horizontal part `(u1, u2)`.
    pub fn horizontal(&self) -> [&SpectralField; 2] {
        [&self.components[0], &self.components[1]]
    }

    pub fn vertical(&self) -> &SpectralField {
        &self.components[2]
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self {
            components: [
                f(&self.components[0]),
                f(&self.components[1]),
                f(&self.components[2]),
            ],
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.components.iter_mut().for_each(|c| c.scale(a));
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|c| c.scaled(a))
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (x, y) in self.components.iter_mut().zip(&other.components) {
            x.axpy(a, y);
        }
    }

    pub fn add(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn dealias(&mut self) {
        self.components.iter_mut().for_each(|c| c.dealias());
    }

    pub fn symmetrize_hermitian(&mut self) {
        self.components
            .iter_mut()
            .for_each(|c| c.symmetrize_hermitian());
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.hermitian_defect())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.max_abs_coeff())
            .fold(0.0, f64::max)
    }

    /// `ξ·û` as a spectral field (times `i` gives the divergence).
    pub fn divergence(&self) -> SpectralField {
        let grid = *self.grid();
        let k: [Vec<f64>; 3] = [grid.wavenumbers(0), grid.wavenumbers(1), grid.wavenumbers(2)];
        let mut out = SpectralField::zeros(grid);
        let (u1, u2, u3) = (
            self.components[0].coeffs(),
            self.components[1].coeffs(),
            self.components[2].coeffs(),
        );
        for ((i, j, l), c) in out.coeffs_mut().indexed_iter_mut() {
            let dot = u1[(i, j, l)] * k[0][i] + u2[(i, j, l)] * k[1][j] + u3[(i, j, l)] * k[2][l];
            *c = dot * Complex64::new(0.0, 1.0);
        }
        out
    }

    /// `max_ξ |ξ·û(ξ)| / max_ξ |û(ξ)|`; zero for the zero field.
    pub fn divergence_ratio(&self) -> f64 {
        let max_u = self.max_abs_coeff();
        if max_u == 0.0 {
            return 0.0;
        }
        self.divergence().max_abs_coeff() / max_u
    }

    pub fn is_divergence_free(&self, tol: f64) -> bool {
        self.divergence_ratio() <= tol
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `½‖u‖²_{L²}`.
    pub fn energy(&self) -> f64 {
        0.5 * self
            .components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
    }

    pub fn to_physical(&self) -> [Array3<f64>; 3] {
        [
            self.components[0].to_physical(),
            self.components[1].to_physical(),
            self.components[2].to_physical(),
        ]
    }

    /// Pointwise maximum of `|u(x)|` on the grid.
    pub fn max_velocity(&self) -> f64 {
        let [a, b, c] = self.to_physical();
        a.iter()
            .zip(b.iter())
            .zip(c.iter())
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
            .fold(0.0, f64::max)
    }

    /// Coefficients are finite and below `limit` in magnitude.
    pub fn all_finite_below(&self, limit: f64) -> bool {
        self.components
            .iter()
            .all(|c| c.data().iter().all(|v| v.re.is_finite() && v.im.is_finite() && v.norm() <= limit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn physical_roundtrip() {
        let g = Grid::new([8, 6, 4], [2.0 * PI, 3.0, 1.0]).unwrap();
        let f = SpectralField::from_fn(g, |x, y, z| {
            (x).sin() + (2.0 * PI * y / 3.0).cos() * (2.0 * PI * z).sin() + 0.25
        });
        let back = SpectralField::from_physical(g, &f.to_physical()).unwrap();
        for (a, b) in f.data().iter().zip(back.data()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn sine_coefficients() {
        let g = Grid::cube(8).unwrap();
        let f = SpectralField::from_fn(g, |x, _, _| x.sin());
        assert!((f.mode([1, 0, 0]) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((f.mode([-1, 0, 0]) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = Grid::new([8, 8, 8], [1.0, 2.0, 3.0]).unwrap();
        let f = SpectralField::from_fn(g, |x, y, z| {
            (2.0 * PI * x).cos() * (PI * y).sin() + (2.0 * PI * z / 3.0).sin()
        });
        let spectral = f.l2_norm();
        let quad = f.lp_norm(2.0);
        assert!((spectral - quad).abs() <= 1e-12 * spectral);
    }

    #[test]
    fn set_real_mode_keeps_field_real() {
        let g = Grid::cube(8).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_real_mode([1, -2, 3], Complex64::new(0.3, -0.7)).unwrap();
        assert!(f.hermitian_defect() < 1e-16);
        let phys = f.to_physical_complex();
        assert!(phys.iter().all(|c| c.im.abs() < 1e-14));
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = SpectralField::zeros(Grid::cube(8).unwrap());
        let b = SpectralField::zeros(Grid::cube(4).unwrap());
        assert!(VectorField::new(a.clone(), b, a).is_err());
    }
}
