//! Seeded band-limited random fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::spectral::leray_project;

/// Generator for trial `trial` of the ensemble seeded by `seed`; each trial
/// uses its own ChaCha stream so trials can run in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Frequency band in physical wavenumbers: `lo ≤ |ξ_h| ≤ hi` and
/// `lo ≤ |ξ3| ≤ hi` per direction, restricted to the dealiasing window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub horizontal: (f64, f64),
    pub vertical: (f64, f64),
}

impl Band {
    /// Dyadic blocks `k_lo..=k_hi`, `j_lo..=j_hi`: radii `[2^{k_lo}, 2^{k_hi}]`.
    pub fn dyadic(k_lo: i32, k_hi: i32, j_lo: i32, j_hi: i32) -> Self {
        Self {
            horizontal: ((k_lo as f64).exp2(), (k_hi as f64).exp2()),
            vertical: ((j_lo as f64).exp2(), (j_hi as f64).exp2()),
        }
    }

    pub fn contains(&self, xi: [f64; 3]) -> bool {
        let h = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let v = xi[2].abs();
        h >= self.horizontal.0 && h <= self.horizontal.1 && v >= self.vertical.0 && v <= self.vertical.1
    }
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Real field with unit-normal complex coefficients on the retained modes
/// accepted by `keep`, Hermitian-symmetrized.
pub fn random_scalar(grid: Grid, rng: &mut impl Rng, keep: impl Fn([f64; 3]) -> bool) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    let k = [grid.wavenumbers(0), grid.wavenumbers(1), grid.wavenumbers(2)];
    for ((a, b, c), v) in f.coeffs_mut().indexed_iter_mut() {
        // draw for every mode so the stream does not depend on the band
        let z = complex_normal(rng);
        if grid.keeps([a, b, c]) && keep([k[0][a], k[1][b], k[2][c]]) {
            *v = z;
        }
    }
    f.symmetrize_hermitian();
    f
}

pub fn random_band_scalar(grid: Grid, rng: &mut impl Rng, band: &Band) -> SpectralField {
    random_scalar(grid, rng, |xi| band.contains(xi))
}

pub fn random_band_vector(grid: Grid, rng: &mut impl Rng, band: &Band) -> VectorField {
    let a = random_band_scalar(grid, rng, band);
    let b = random_band_scalar(grid, rng, band);
    let c = random_band_scalar(grid, rng, band);
    VectorField::new(a, b, c).expect("shared grid")
}

/// Divergence-free random field on the band.
pub fn random_solenoidal(grid: Grid, rng: &mut impl Rng, band: &Band) -> VectorField {
    leray_project(&random_band_vector(grid, rng, band))
}

/// Divergence-free field supported on `lo ≤ |m| ≤ hi` (integer mode radius),
/// scaled to the given maximal coefficient magnitude.
pub fn random_shell(grid: Grid, rng: &mut impl Rng, lo: f64, hi: f64, amplitude: f64) -> VectorField {
    let l = grid.lengths();
    let two_pi = 2.0 * std::f64::consts::PI;
    let shell = |xi: [f64; 3]| {
        let m2: f64 = (0..3).map(|i| (xi[i] * l[i] / two_pi).powi(2)).sum();
        let m = m2.sqrt();
        m >= lo && m <= hi && m > 0.0
    };
    let u = VectorField::new(
        random_scalar(grid, rng, shell),
        random_scalar(grid, rng, shell),
        random_scalar(grid, rng, shell),
    )
    .expect("shared grid");
    let mut u = leray_project(&u);
    let top = u.max_abs_coeff();
    if top > 0.0 {
        u.scale(amplitude / top);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_field() {
        let g = Grid::cube(16).unwrap();
        let band = Band::dyadic(0, 2, 0, 2);
        let a = random_band_scalar(g, &mut trial_rng(5, 3), &band);
        let b = random_band_scalar(g, &mut trial_rng(5, 3), &band);
        let c = random_band_scalar(g, &mut trial_rng(5, 4), &band);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.hermitian_defect() < 1e-15);
    }

    #[test]
    fn band_is_respected() {
        let g = Grid::cube(16).unwrap();
        let band = Band::dyadic(1, 2, 0, 1);
        let f = random_band_scalar(g, &mut trial_rng(1, 0), &band);
        for ((a, b, c), v) in f.coeffs().indexed_iter() {
            if *v != Complex64::new(0.0, 0.0) {
                let xi = [g.wavenumber(0, a), g.wavenumber(1, b), g.wavenumber(2, c)];
                assert!(band.contains(xi));
            }
        }
        assert!(!f.is_zero());
    }

    #[test]
    fn solenoidal_is_divergence_free() {
        let g = Grid::cube(16).unwrap();
        let u = random_solenoidal(g, &mut trial_rng(2, 0), &Band::dyadic(0, 2, 0, 2));
        assert!(u.is_divergence_free(1e-12));
        let w = random_shell(g, &mut trial_rng(2, 1), 1.0, 3.0, 0.1);
        assert!(w.is_divergence_free(1e-12));
        assert!((w.max_abs_coeff() - 0.1).abs() < 1e-15);
    }
}
