//! Periodic computational box.
//!
//! Coefficients are stored in FFT order along every axis: array index `i`
//! holds the signed mode `m = i` for `i < n/2` and `m = i - n` otherwise, so
//! the discrete frequency is `ξ = 2π m / L`.

use std::f64::consts::PI;

use crate::error::{AnsError, Result};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: [usize; 3],
    lengths: [f64; 3],
    dealias_fraction: f64,
}

impl Grid {
    pub fn new(n: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        Self::with_dealias(n, lengths, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn with_dealias(n: [usize; 3], lengths: [f64; 3], dealias_fraction: f64) -> Result<Self> {
        for (axis, &ni) in n.iter().enumerate() {
            if ni == 0 || ni % 2 != 0 {
                return Err(AnsError::InvalidGrid(format!(
                    "axis {axis}: mode count {ni} must be a positive even integer"
                )));
            }
        }
        for (axis, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(AnsError::InvalidGrid(format!(
                    "axis {axis}: box length {l} must be positive and finite"
                )));
            }
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(AnsError::InvalidGrid(format!(
                "dealias fraction {dealias_fraction} must lie in (0, 1]"
            )));
        }
        Ok(Self {
            n,
            lengths,
            dealias_fraction,
        })
    }

    /// Cube of side `2π` with `n` modes per axis.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new([n; 3], [2.0 * PI; 3])
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n[0], self.n[1], self.n[2])
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.n[axis] as f64
    }

    /// Signed mode number for an array index along `axis`.
    #[inline]
    pub fn mode(&self, axis: usize, index: usize) -> i64 {
        let n = self.n[axis];
        if index < n / 2 {
            index as i64
        } else {
            index as i64 - n as i64
        }
    }

    /// Array index of a signed mode, if representable.
    pub fn index_of(&self, axis: usize, mode: i64) -> Option<usize> {
        let n = self.n[axis] as i64;
        if mode < -n / 2 || mode >= n / 2 {
            return None;
        }
        Some(mode.rem_euclid(n) as usize)
    }

    /// Index of the mirrored mode `-m`.
    #[inline]
    pub fn mirror_index(&self, axis: usize, index: usize) -> usize {
        let n = self.n[axis];
        (n - index) % n
    }

    #[inline]
    pub fn wavenumber(&self, axis: usize, index: usize) -> f64 {
        2.0 * PI * self.mode(axis, index) as f64 / self.lengths[axis]
    }

    /// All wavenumbers along one axis, in storage order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|i| self.wavenumber(axis, i)).collect()
    }

    /// Largest retained `|m|` along `axis` under the dealiasing rule.
    pub fn dealias_limit(&self, axis: usize) -> i64 {
        (self.dealias_fraction * (self.n[axis] / 2) as f64 + 1e-9).floor() as i64
    }

    #[inline]
    pub fn keeps(&self, index: [usize; 3]) -> bool {
        (0..3).all(|a| self.mode(a, index[a]).abs() <= self.dealias_limit(a))
    }

    /// Largest `|ξ_i|` representable on each axis.
    pub fn max_wavenumber(&self, axis: usize) -> f64 {
        2.0 * PI * (self.n[axis] / 2) as f64 / self.lengths[axis]
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.n == other.n && self.lengths == other.lengths
    }

    /// Same box with every mode count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::with_dealias(
            [self.n[0] * factor, self.n[1] * factor, self.n[2] * factor],
            self.lengths,
            self.dealias_fraction,
        )
    }

    /// Same mode counts on a box of half the side lengths.
    pub fn halved_box(&self) -> Self {
        Self {
            n: self.n,
            lengths: [
                self.lengths[0] / 2.0,
                self.lengths[1] / 2.0,
                self.lengths[2] / 2.0,
            ],
            dealias_fraction: self.dealias_fraction,
        }
    }

    /// Physical coordinate of a grid point.
    pub fn coordinate(&self, axis: usize, index: usize) -> f64 {
        index as f64 * self.spacing(axis)
    }

    #[inline]
    pub fn flat(&self, index: [usize; 3]) -> usize {
        (index[0] * self.n[1] + index[1]) * self.n[2] + index[2]
    }
}
