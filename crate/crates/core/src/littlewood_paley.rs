//! Anisotropic Littlewood–Paley blocks.
//!
//! The radial profile `φ` is built by normalizing a smooth bump `η` supported
//! on `(1/2, 2)` against its dyadic translates, `φ(r) = η(r) / Σ_j η(2^{-j} r)`,
//! so `Σ_j φ(2^{-j} r) = 1` holds by construction. Horizontal blocks filter
//! by `φ(2^{-k}|ξ_h|)` and vertical blocks by `φ(2^{-j}|ξ_3|)`.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;

use crate::error::{AnsError, Result};
use crate::field::{lp_norm_of_samples, SpectralField};
use crate::fft::Fft3;
use crate::grid::Grid;
use crate::io::{fmt_f64, CsvTable};

/// Table nodes per octave in `log2 r`; the table spans the two octaves of
/// `(1/2, 2)`.
const NODES_PER_OCTAVE: usize = 1 << 13;

/// Tabulated dyadic profile `φ`.
#[derive(Clone, Debug)]
pub struct DyadicProfile {
    smoothing: f64,
    /// `φ` at `log2 r = -1 + i/NODES_PER_OCTAVE`, `i = 0..=2·NODES_PER_OCTAVE`.
    samples: Vec<f64>,
}

static STANDARD: Lazy<DyadicProfile> = Lazy::new(|| DyadicProfile::build(1.0));

impl DyadicProfile {
    /// Builds the profile from the bump `exp(-s / ((r - 1/2)(2 - r)))`.
    pub fn build(smoothing: f64) -> Self {
        assert!(smoothing > 0.0, "smoothing must be positive");
        let eta = |r: f64| -> f64 {
            if r <= 0.5 || r >= 2.0 {
                0.0
            } else {
                (-smoothing / ((r - 0.5) * (2.0 - r))).exp()
            }
        };
        let total = 2 * NODES_PER_OCTAVE;
        let h = 1.0 / NODES_PER_OCTAVE as f64;
        let mut samples = vec![0.0; total + 1];
        for q in 0..NODES_PER_OCTAVE {
            // base radius in [1, 2); the three octave partners are exact
            // power-of-two multiples so they share one normalizer
            let base = (q as f64 * h).exp2();
            let partners = [0.5 * base, base, 2.0 * base];
            let norm: f64 = eta(0.25 * base) + eta(partners[0]) + eta(partners[1]) + eta(partners[2]);
            for (o, r) in partners.iter().enumerate() {
                let idx = o * NODES_PER_OCTAVE + q;
                if idx <= total {
                    samples[idx] = if norm > 0.0 { eta(*r) / norm } else { 0.0 };
                }
            }
        }
        samples[total] = 0.0;
        Self { smoothing, samples }
    }

    /// Shared profile with unit smoothing.
    pub fn standard() -> &'static DyadicProfile {
        &STANDARD
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    fn node(&self, i: isize) -> f64 {
        if i < 0 || i as usize >= self.samples.len() {
            0.0
        } else {
            self.samples[i as usize]
        }
    }

    /// `φ(r)` by six-point Lagrange interpolation in `log2 r`.
    pub fn phi(&self, r: f64) -> f64 {
        if !(r > 0.5 && r < 2.0) {
            return 0.0;
        }
        let t = (r.log2() + 1.0) * NODES_PER_OCTAVE as f64;
        let base = t.floor();
        let x = t - base;
        let base = base as isize;
        let mut acc = 0.0;
        for a in -2..=3isize {
            let mut w = 1.0;
            for b in -2..=3isize {
                if b != a {
                    w *= (x - b as f64) / (a - b) as f64;
                }
            }
            acc += w * self.node(base + a);
        }
        acc.clamp(0.0, 1.0)
    }

    /// `φ̃(r) = 1 − Σ_{j≥1} φ(2^{-j} r)`.
    pub fn phi_tilde(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            // only j = 1 is active and φ(r) + φ(r/2) = 1 on (1, 2)
            1.0 - self.phi(0.5 * r)
        }
    }

    /// `Σ_j φ(2^{-j} r)` over every index with a nonzero term.
    pub fn partition_sum(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let centre = r.log2().round() as i32;
        (centre - 2..=centre + 2)
            .map(|j| self.phi(r * (-j as f64).exp2()))
            .sum()
    }

    /// Nonzero `(index, weight)` pairs of the homogeneous decomposition at `r`.
    pub fn homogeneous_weights(&self, r: f64) -> Weights {
        let mut w = Weights::default();
        if r <= 0.0 {
            return w;
        }
        let centre = r.log2().floor() as i32;
        for k in centre - 1..=centre + 2 {
            let v = self.phi(r * (-k as f64).exp2());
            if v > 0.0 {
                w.push(k, v);
            }
        }
        w
    }

    /// Nonzero `(index, weight)` pairs of the inhomogeneous decomposition.
    pub fn inhomogeneous_weights(&self, r: f64) -> Weights {
        let mut w = Weights::default();
        let tilde = self.phi_tilde(r);
        if tilde > 0.0 {
            w.push(0, tilde);
        }
        if r > 1.0 {
            for (k, v) in self.homogeneous_weights(r).iter() {
                if k >= 1 {
                    w.push(k, v);
                }
            }
        }
        w
    }
}

/// At most two active dyadic indices at one radius.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Weights {
    entries: [(i32, f64); 2],
    len: u8,
}

impl Weights {
    fn push(&mut self, k: i32, v: f64) {
        assert!(self.len < 2, "more than two overlapping dyadic blocks");
        self.entries[self.len as usize] = (k, v);
        self.len += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.entries[..self.len as usize].iter().copied()
    }

    pub fn get(&self, k: i32) -> f64 {
        self.iter().find(|(i, _)| *i == k).map_or(0.0, |(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Truncation of the dyadic index sets to the blocks a grid can populate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockRange {
    pub k_min: i32,
    pub k_max: i32,
    pub j_min: i32,
    pub j_max: i32,
}

impl BlockRange {
    pub fn for_grid(grid: &Grid, homogeneous: bool) -> Self {
        let l = grid.lengths();
        let n = grid.n();
        let two_pi = 2.0 * std::f64::consts::PI;
        let h_min = two_pi / l[0].max(l[1]);
        let h_max = (grid.max_wavenumber(0).powi(2) + grid.max_wavenumber(1).powi(2)).sqrt();
        let v_min = two_pi / l[2];
        let v_max = two_pi * (n[2] / 2) as f64 / l[2];
        let lo = |r: f64| (r.log2().ceil() as i32) - 1;
        let hi = |r: f64| (r.log2().floor() as i32) + 1;
        if homogeneous {
            Self {
                k_min: lo(h_min),
                k_max: hi(h_max),
                j_min: lo(v_min),
                j_max: hi(v_max),
            }
        } else {
            Self {
                k_min: 0,
                k_max: hi(h_max).max(0),
                j_min: 0,
                j_max: hi(v_max).max(0),
            }
        }
    }

    pub fn k_len(&self) -> usize {
        (self.k_max - self.k_min + 1).max(0) as usize
    }

    pub fn j_len(&self) -> usize {
        (self.j_max - self.j_min + 1).max(0) as usize
    }

    pub fn contains(&self, k: i32, j: i32) -> bool {
        (self.k_min..=self.k_max).contains(&k) && (self.j_min..=self.j_max).contains(&j)
    }

    fn slot(&self, k: i32, j: i32) -> usize {
        (k - self.k_min) as usize * self.j_len() + (j - self.j_min) as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (self.k_min..=self.k_max).flat_map(move |k| (self.j_min..=self.j_max).map(move |j| (k, j)))
    }
}

/// Per-grid tabulation of the horizontal and vertical block weights.
#[derive(Clone, Debug)]
pub struct BlockPlan<'a> {
    grid: Grid,
    profile: &'a DyadicProfile,
    homogeneous: bool,
    range: BlockRange,
    /// indexed by `i1 * n2 + i2`
    horizontal: Vec<Weights>,
    /// indexed by `i3`
    vertical: Vec<Weights>,
}

impl<'a> BlockPlan<'a> {
    pub fn new(grid: Grid, profile: &'a DyadicProfile, homogeneous: bool) -> Self {
        let (n0, n1, n2) = grid.shape();
        let k0 = grid.wavenumbers(0);
        let k1 = grid.wavenumbers(1);
        let k2 = grid.wavenumbers(2);
        let weights = |r: f64| {
            if homogeneous {
                profile.homogeneous_weights(r)
            } else {
                profile.inhomogeneous_weights(r)
            }
        };
        let mut horizontal = Vec::with_capacity(n0 * n1);
        for a in &k0 {
            for b in &k1 {
                horizontal.push(weights((a * a + b * b).sqrt()));
            }
        }
        let vertical = (0..n2).map(|i| weights(k2[i].abs())).collect();
        Self {
            grid,
            profile,
            homogeneous,
            range: BlockRange::for_grid(&grid, homogeneous),
            horizontal,
            vertical,
        }
    }

    pub fn standard(grid: Grid, homogeneous: bool) -> BlockPlan<'static> {
        BlockPlan::new(grid, DyadicProfile::standard(), homogeneous)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn profile(&self) -> &DyadicProfile {
        self.profile
    }

    pub fn range(&self) -> BlockRange {
        self.range
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// Horizontal weights at `(i1, i2)`.
    pub fn horizontal_weights(&self, i1: usize, i2: usize) -> Weights {
        self.horizontal[i1 * self.grid.n()[1] + i2]
    }

    pub fn vertical_weights(&self, i3: usize) -> Weights {
        self.vertical[i3]
    }

    fn check_index(&self, k: i32) -> Result<()> {
        if !self.homogeneous && k < 0 {
            return Err(AnsError::Domain(format!(
                "inhomogeneous block index must be non-negative, got {k}"
            )));
        }
        Ok(())
    }

    fn check_grid(&self, f: &SpectralField) -> Result<()> {
        if f.grid().same_shape(&self.grid) {
            Ok(())
        } else {
            Err(AnsError::GridMismatch(
                "field grid differs from block plan grid".into(),
            ))
        }
    }

    /// `Δ^h_k f`.
    pub fn hblock(&self, f: &SpectralField, k: i32) -> Result<SpectralField> {
        self.check_index(k)?;
        self.check_grid(f)?;
        let mut out = f.clone();
        let n2 = self.grid.n()[1];
        for ((i, j, _), c) in out.coeffs_mut().indexed_iter_mut() {
            *c *= self.horizontal[i * n2 + j].get(k);
        }
        Ok(out)
    }

    /// `Δ^v_j f`.
    pub fn vblock(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_index(j)?;
        self.check_grid(f)?;
        let mut out = f.clone();
        for ((_, _, l), c) in out.coeffs_mut().indexed_iter_mut() {
            *c *= self.vertical[l].get(j);
        }
        Ok(out)
    }

    /// `Δ^h_k Δ^v_j f`.
    pub fn block(&self, f: &SpectralField, k: i32, j: i32) -> Result<SpectralField> {
        self.check_index(k)?;
        self.check_index(j)?;
        self.check_grid(f)?;
        let mut out = f.clone();
        let n2 = self.grid.n()[1];
        for ((a, b, l), c) in out.coeffs_mut().indexed_iter_mut() {
            *c *= self.horizontal[a * n2 + b].get(k) * self.vertical[l].get(j);
        }
        Ok(out)
    }

    /// Per-block `Σ φ_h² φ_v² |c|²` over all components, in range order.
    fn block_energies(&self, components: &[&SpectralField]) -> Vec<f64> {
        let range = self.range;
        let mut acc = vec![0.0; range.k_len() * range.j_len()];
        let (n0, n1, n2) = self.grid.shape();
        let slices: Vec<&[Complex64]> = components.iter().map(|c| c.data()).collect();
        for a in 0..n0 {
            for b in 0..n1 {
                let hw = self.horizontal[a * n1 + b];
                if hw.is_empty() {
                    continue;
                }
                for l in 0..n2 {
                    let vw = self.vertical[l];
                    if vw.is_empty() {
                        continue;
                    }
                    let idx = (a * n1 + b) * n2 + l;
                    let mag: f64 = slices.iter().map(|s| s[idx].norm_sqr()).sum();
                    if mag == 0.0 {
                        continue;
                    }
                    for (k, wh) in hw.iter() {
                        for (j, wv) in vw.iter() {
                            if range.contains(k, j) {
                                let w = wh * wv;
                                acc[range.slot(k, j)] += w * w * mag;
                            }
                        }
                    }
                }
            }
        }
        acc
    }

    /// `L^p` norms of every block of the (vector) field whose components are
    /// given. The vector norm is the `L^p` norm of the pointwise Euclidean
    /// magnitude.
    pub fn decompose(&self, components: &[&SpectralField], p: f64) -> Result<BlockNorms> {
        if !(p >= 1.0) {
            return Err(AnsError::Domain(format!("L^p exponent must be >= 1, got {p}")));
        }
        for c in components {
            self.check_grid(c)?;
        }
        let range = self.range;
        let energies = self.block_energies(components);
        let norms = if p == 2.0 {
            let vol = self.grid.volume();
            energies.iter().map(|e| (vol * e).sqrt()).collect()
        } else {
            let active: Vec<(i32, i32)> = range
                .iter()
                .filter(|&(k, j)| energies[range.slot(k, j)] > 0.0)
                .collect();
            let computed: Vec<((i32, i32), f64)> = active
                .par_iter()
                .map(|&(k, j)| ((k, j), self.block_lp(components, k, j, p)))
                .collect();
            let mut norms = vec![0.0; energies.len()];
            for ((k, j), v) in computed {
                norms[range.slot(k, j)] = v;
            }
            norms
        };
        Ok(BlockNorms { range, p, norms })
    }

    fn block_lp(&self, components: &[&SpectralField], k: i32, j: i32, p: f64) -> f64 {
        let plan = Fft3::for_shape(self.grid.n());
        let samples: Vec<_> = components
            .iter()
            .map(|c| {
                let mut blk = self.block(c, k, j).expect("indices validated by caller");
                plan.inverse(blk.data_mut());
                blk.into_coeffs()
            })
            .collect();
        lp_norm_of_samples(&samples, p, self.grid.cell_volume())
    }
}

/// Block `L^p` norms indexed by `(k, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockNorms {
    range: BlockRange,
    p: f64,
    norms: Vec<f64>,
}

impl BlockNorms {
    pub fn range(&self) -> BlockRange {
        self.range
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Norm of block `(k, j)`; zero outside the realized range.
    pub fn get(&self, k: i32, j: i32) -> f64 {
        if self.range.contains(k, j) {
            self.norms[self.range.slot(k, j)]
        } else {
            0.0
        }
    }

    /// `(k, j, norm)` in increasing `(k, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, f64)> + '_ {
        self.range.iter().map(move |(k, j)| (k, j, self.get(k, j)))
    }

    /// `Σ 2^{sk} 2^{σj} ‖Δ_k Δ_j f‖` in fixed order.
    pub fn weighted_sum(&self, s: f64, sigma: f64) -> f64 {
        self.iter()
            .filter(|(_, _, v)| *v != 0.0)
            .map(|(k, j, v)| (s * k as f64 + sigma * j as f64).exp2() * v)
            .sum()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["k", "j", "norm"]);
        for (k, j, v) in self.iter() {
            t.push_row(vec![k.to_string(), j.to_string(), fmt_f64(v)]);
        }
        t
    }
}

/// `Δ̇^h_k f` (or `Δ^h_k f` when `homogeneous` is false) with the standard profile.
pub fn hblock(f: &SpectralField, k: i32, homogeneous: bool) -> Result<SpectralField> {
    BlockPlan::standard(*f.grid(), homogeneous).hblock(f, k)
}

/// `Δ̇^v_j f` (or `Δ^v_j f`) with the standard profile.
pub fn vblock(f: &SpectralField, j: i32, homogeneous: bool) -> Result<SpectralField> {
    BlockPlan::standard(*f.grid(), homogeneous).vblock(f, j)
}

/// Homogeneous block `L^p` norms of a scalar field over the grid's range.
pub fn decompose(f: &SpectralField, p: f64) -> Result<BlockNorms> {
    BlockPlan::standard(*f.grid(), true).decompose(&[f], p)
}
