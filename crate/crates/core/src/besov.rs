//! Anisotropic Besov norms `Σ_{k,j} 2^{sk} 2^{σj} ‖Δ_k^h Δ_j^v f‖_{L^p}` and
//! the composite data norms built from them.

use crate::error::{AnsError, Result};
use crate::field::SpectralField;
use crate::io::{fmt_f64, CsvTable};
use crate::littlewood_paley::{BlockNorms, BlockPlan};
use crate::spectral::apply_derivative;

/// Regularity pair `(s, σ)`, integrability `p` and homogeneity flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub sigma: f64,
    pub p: f64,
    pub homogeneous: bool,
}

impl BesovIndex {
    pub fn new(s: f64, sigma: f64, p: f64, homogeneous: bool) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(AnsError::Domain(format!("p must be >= 1, got {p}")));
        }
        if !s.is_finite() || !sigma.is_finite() {
            return Err(AnsError::Domain("regularity indices must be finite".into()));
        }
        Ok(Self {
            s,
            sigma,
            p,
            homogeneous,
        })
    }

    pub fn homogeneous(s: f64, sigma: f64, p: f64) -> Result<Self> {
        Self::new(s, sigma, p, true)
    }

    pub fn inhomogeneous(s: f64, sigma: f64, p: f64) -> Result<Self> {
        Self::new(s, sigma, p, false)
    }

    /// `(2/p − 1, 1/p)`: the scaling-critical index.
    pub fn critical(p: f64) -> Result<Self> {
        Self::homogeneous(2.0 / p - 1.0, 1.0 / p, p)
    }

    /// Same index with regularities shifted by `(ds, dsigma)`.
    pub fn shifted(&self, ds: f64, dsigma: f64) -> Self {
        Self {
            s: self.s + ds,
            sigma: self.sigma + dsigma,
            ..*self
        }
    }

    /// `1 − 3/p + s + σ`: the exponent picked up under `f ↦ 2f(2·)`.
    pub fn scaling_exponent(&self) -> f64 {
        1.0 - 3.0 / self.p + self.s + self.sigma
    }
}

/// Checks `1 ≤ p < 3` and `max{0, 2(1 − 2/p)} < θ < min{1, 2/p}`.
pub fn validate_p_theta(p: f64, theta: f64) -> Result<()> {
    if !(1.0..3.0).contains(&p) {
        return Err(AnsError::Domain(format!("p = {p} outside [1, 3)")));
    }
    let lo = (2.0 * (1.0 - 2.0 / p)).max(0.0);
    let hi = (2.0 / p).min(1.0);
    if !(theta > lo && theta < hi) {
        return Err(AnsError::Domain(format!(
            "theta = {theta} outside ({lo}, {hi}) for p = {p}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaKind {
    Horizontal,
    Vertical,
}

/// Index sets for the horizontal and vertical data classes.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSet {
    kind: LambdaKind,
    p: f64,
    theta: f64,
    entries: Vec<(f64, f64)>,
}

impl LambdaSet {
    /// `{(2/p−1, 1/p), (2/p−1+θ, 1/p−θ), (2/p−2+θ, 1/p−θ)}`.
    pub fn horizontal(p: f64, theta: f64) -> Result<Self> {
        validate_p_theta(p, theta)?;
        let q = 1.0 / p;
        Ok(Self {
            kind: LambdaKind::Horizontal,
            p,
            theta,
            entries: vec![
                (2.0 * q - 1.0, q),
                (2.0 * q - 1.0 + theta, q - theta),
                (2.0 * q - 2.0 + theta, q - theta),
            ],
        })
    }

    /// `{(2/p−1, 1/p), (2/p−2+θ, 1/p−θ)}`.
    pub fn vertical(p: f64, theta: f64) -> Result<Self> {
        validate_p_theta(p, theta)?;
        let q = 1.0 / p;
        Ok(Self {
            kind: LambdaKind::Vertical,
            p,
            theta,
            entries: vec![(2.0 * q - 1.0, q), (2.0 * q - 2.0 + theta, q - theta)],
        })
    }

    pub fn kind(&self) -> LambdaKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn indices(&self) -> Vec<BesovIndex> {
        self.entries
            .iter()
            .map(|&(s, sigma)| BesovIndex {
                s,
                sigma,
                p: self.p,
                homogeneous: true,
            })
            .collect()
    }

    /// Sum over the set of the norms read off one block table.
    pub fn sum_from(&self, blocks: &BlockNorms) -> f64 {
        self.entries
            .iter()
            .map(|&(s, sigma)| blocks.weighted_sum(s, sigma))
            .sum()
    }
}

fn plan_for(f: &SpectralField, idx: &BesovIndex) -> BlockPlan<'static> {
    BlockPlan::standard(*f.grid(), idx.homogeneous)
}

/// Block table of a scalar or vector field (components share a grid).
pub fn block_norms(components: &[&SpectralField], p: f64, homogeneous: bool) -> Result<BlockNorms> {
    let first = components
        .first()
        .ok_or_else(|| AnsError::Domain("no components given".into()))?;
    BlockPlan::standard(*first.grid(), homogeneous).decompose(components, p)
}

pub fn besov_norm(f: &SpectralField, idx: &BesovIndex) -> Result<f64> {
    Ok(plan_for(f, idx)
        .decompose(&[f], idx.p)?
        .weighted_sum(idx.s, idx.sigma))
}

/// Norm of a vector field (Euclidean magnitude inside each block).
pub fn besov_norm_vector(components: &[&SpectralField], idx: &BesovIndex) -> Result<f64> {
    Ok(block_norms(components, idx.p, idx.homogeneous)?.weighted_sum(idx.s, idx.sigma))
}

/// Per-block rows: `k, j, weight, block_norm, contribution`.
pub fn contribution_table(components: &[&SpectralField], idx: &BesovIndex) -> Result<CsvTable> {
    let blocks = block_norms(components, idx.p, idx.homogeneous)?;
    let mut t = CsvTable::new(["k", "j", "weight", "block_norm", "contribution"]);
    for (k, j, v) in blocks.iter() {
        let w = (idx.s * k as f64 + idx.sigma * j as f64).exp2();
        t.push_row(vec![
            k.to_string(),
            j.to_string(),
            fmt_f64(w),
            fmt_f64(v),
            fmt_f64(w * v),
        ]);
    }
    Ok(t)
}

/// `2 f(2x)` realized on the half-size box with the same coefficients
/// doubled, so every frequency doubles and no mode leaves the grid.
pub fn dyadic_rescale(f: &SpectralField) -> SpectralField {
    let grid = f.grid().halved_box();
    let coeffs = f.coeffs().mapv(|c| c * 2.0);
    SpectralField::from_coeffs(grid, coeffs).expect("shape preserved")
}

/// `‖2f(2·)‖ / ‖f‖`; equals `2^{1−3/p+s+σ}`.
pub fn scaling_check(f: &SpectralField, idx: &BesovIndex) -> Result<f64> {
    let base = besov_norm(f, idx)?;
    if base == 0.0 {
        return Err(AnsError::Domain(
            "scaling ratio undefined for a field with zero norm".into(),
        ));
    }
    Ok(besov_norm(&dyadic_rescale(f), idx)? / base)
}

/// `(‖u_{0,h}‖_{D^h}, ‖u_{0,3}‖_{D^v})` as sums over the two index sets.
pub fn composite_data_norm(
    u0h: [&SpectralField; 2],
    u03: &SpectralField,
    lam_h: &LambdaSet,
    lam_v: &LambdaSet,
) -> Result<(f64, f64)> {
    let h = lam_h.sum_from(&block_norms(&u0h, lam_h.p(), true)?);
    let v = lam_v.sum_from(&block_norms(&[u03], lam_v.p(), true)?);
    Ok((h, v))
}

/// Largest exponent accepted by [`gevrey_weight`].
pub const GEVREY_EXPONENT_LIMIT: f64 = 700.0;

/// Multiplies every coefficient by `e^{ρ|ξ3|}`.
pub fn gevrey_weight(f: &SpectralField, rho: f64) -> Result<SpectralField> {
    if !(rho >= 0.0) {
        return Err(AnsError::Domain(format!("rho must be >= 0, got {rho}")));
    }
    let top = rho * f.grid().max_wavenumber(2);
    if top > GEVREY_EXPONENT_LIMIT {
        return Err(AnsError::Overflow(format!(
            "rho * max|xi3| = {top:.6} exceeds {GEVREY_EXPONENT_LIMIT}"
        )));
    }
    let mut out = f.clone();
    out.apply_real_symbol(|xi| (rho * xi[2].abs()).exp());
    Ok(out)
}

/// Default truncation order of the vertical derivative series.
pub const DEFAULT_SERIES_ORDER: usize = 24;

/// Truncated series `Σ_{β3≤B} ρ0^{β3}/β3! ‖∂_3^{β3} u_{0,h}‖_{D^h}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesNorm {
    pub total: f64,
    /// Weighted term for each `β3 = 0..=B`.
    pub terms: Vec<f64>,
}

impl SeriesNorm {
    /// Magnitude of the `β3 = B` term.
    pub fn last_term(&self) -> f64 {
        self.terms.last().copied().unwrap_or(0.0)
    }
}

pub fn analytic_series_data_norm(
    u0h: [&SpectralField; 2],
    rho0: f64,
    order: usize,
    lam_h: &LambdaSet,
) -> Result<SeriesNorm> {
    if !(rho0 >= 0.0) {
        return Err(AnsError::Domain(format!("rho0 must be >= 0, got {rho0}")));
    }
    u0h[0].check_same_grid(u0h[1])?;
    let plan = BlockPlan::standard(*u0h[0].grid(), true);
    let mut terms = Vec::with_capacity(order + 1);
    let mut coeff = 1.0;
    for b3 in 0..=order {
        if b3 > 0 {
            coeff *= rho0 / b3 as f64;
        }
        let beta = [0, 0, b3 as u32];
        let d1 = apply_derivative(u0h[0], beta);
        let d2 = apply_derivative(u0h[1], beta);
        let blocks = plan.decompose(&[&d1, &d2], lam_h.p())?;
        terms.push(coeff * lam_h.sum_from(&blocks));
    }
    Ok(SeriesNorm {
        total: terms.iter().sum(),
        terms,
    })
}

/// Composite trapezoid rule on sorted, possibly nonuniform nodes.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `∫ ‖F(t)‖ f(t) dt` by the trapezoid rule over the samples.
pub fn weighted_time_norm(
    trajectory: &[(f64, SpectralField)],
    idx: &BesovIndex,
    weight: &[f64],
) -> Result<f64> {
    if trajectory.len() < 2 {
        return Err(AnsError::Domain(
            "time norm needs at least two samples".into(),
        ));
    }
    if weight.len() != trajectory.len() {
        return Err(AnsError::Domain(format!(
            "weight has {} samples, trajectory has {}",
            weight.len(),
            trajectory.len()
        )));
    }
    if trajectory.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(AnsError::Domain("trajectory times must be sorted".into()));
    }
    let times: Vec<f64> = trajectory.iter().map(|(t, _)| *t).collect();
    let mut values = Vec::with_capacity(trajectory.len());
    for ((_, f), w) in trajectory.iter().zip(weight) {
        values.push(if *w == 0.0 { 0.0 } else { besov_norm(f, idx)? * w });
    }
    Ok(trapezoid(&times, &values))
}
