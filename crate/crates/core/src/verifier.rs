//! Randomized stress tests of the linear and bilinear estimates, reporting
//! empirical constants.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::besov::{besov_norm, besov_norm_vector, BesovIndex};
use crate::error::{AnsError, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::heat::{maximal_regularity_report, Forcing, FrictionSchedule};
use crate::io::{fmt_f64, CsvTable};
use crate::random::{trial_rng, Band};
use crate::spectral::pointwise_product;

/// Ensemble of band-limited random fields. Draws are indexed by integer
/// mode, so the same seed gives the same functions on every grid whose
/// window holds the band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub trials: usize,
    pub seed: u64,
    /// Dyadic band `(k_lo, k_hi, j_lo, j_hi)`.
    pub band: (i32, i32, i32, i32),
    pub grid: Grid,
}

impl EnsembleSpec {
    pub fn new(trials: usize, seed: u64, band: (i32, i32, i32, i32), grid: Grid) -> Result<Self> {
        let spec = Self {
            trials,
            seed,
            band,
            grid,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 100 trials on `|ξ_h|, |ξ3| ∈ [1, 4]`.
    pub fn standard(grid: Grid, seed: u64) -> Result<Self> {
        Self::new(100, seed, (0, 2, 0, 2), grid)
    }

    pub fn band(&self) -> Band {
        let (a, b, c, d) = self.band;
        Band::dyadic(a, b, c, d)
    }

    pub fn with_grid(&self, grid: Grid) -> Result<Self> {
        Self::new(self.trials, self.seed, self.band, grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(AnsError::Domain("ensemble needs at least one trial".into()));
        }
        let (a, b, c, d) = self.band;
        if a > b || c > d {
            return Err(AnsError::Domain(format!("empty band {:?}", self.band)));
        }
        let band = self.band();
        let two_pi = 2.0 * std::f64::consts::PI;
        let limit = |axis: usize| self.grid.dealias_limit(axis) as f64 * two_pi / self.grid.lengths()[axis];
        // products of two draws must stay inside the window
        for (axis, hi) in [(0, band.horizontal.1), (1, band.horizontal.1), (2, band.vertical.1)] {
            if 2.0 * hi > limit(axis) {
                return Err(AnsError::Precondition(format!(
                    "band edge {hi} on axis {axis} leaves no product margin below the window edge {}",
                    limit(axis)
                )));
            }
        }
        Ok(())
    }

    fn mode_bounds(&self) -> [i64; 3] {
        let band = self.band();
        let l = self.grid.lengths();
        let two_pi = 2.0 * std::f64::consts::PI;
        let hi = [band.horizontal.1, band.horizontal.1, band.vertical.1];
        [0, 1, 2].map(|a| (hi[a] * l[a] / two_pi).floor() as i64)
    }

    /// Real field with unit-normal coefficients on the band.
    pub fn draw_scalar(&self, rng: &mut impl Rng) -> SpectralField {
        let grid = self.grid;
        let band = self.band();
        let [k0, k1, k2] = self.mode_bounds();
        let l = grid.lengths();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut f = SpectralField::zeros(grid);
        for m0 in -k0..=k0 {
            for m1 in -k1..=k1 {
                for m2 in -k2..=k2 {
                    let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                    let xi = [
                        two_pi * m0 as f64 / l[0],
                        two_pi * m1 as f64 / l[1],
                        two_pi * m2 as f64 / l[2],
                    ];
                    if band.contains(xi) {
                        f.set_mode([m0, m1, m2], z).expect("validated band");
                    }
                }
            }
        }
        f.symmetrize_hermitian();
        f
    }
}

/// Exponents of the two-term product estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductExponents {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub sigma: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub p: f64,
}

impl ProductExponents {
    /// `s0 = 1`, `s_i = 1/2`, `σ = σ1 = 1/4`, `σ2 = 0` at `p = 2`.
    pub fn standard() -> Self {
        Self {
            s0: 1.0,
            s1: 0.5,
            s2: 0.5,
            s3: 0.5,
            s4: 0.5,
            sigma: 0.25,
            sigma1: 0.25,
            sigma2: 0.0,
            p: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = 1.0 / self.p;
        let eps = 1e-12;
        let fail = |msg: String| Err(AnsError::Precondition(msg));
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return fail(format!("1 <= p < inf violated: p = {}", self.p));
        }
        if (self.s1 + self.s2 - self.s0).abs() > eps {
            return fail(format!("s0 = s1 + s2 violated: {} != {} + {}", self.s0, self.s1, self.s2));
        }
        if (self.s3 + self.s4 - self.s0).abs() > eps {
            return fail(format!("s0 = s3 + s4 violated: {} != {} + {}", self.s0, self.s3, self.s4));
        }
        let floor = 0f64.max(2.0 * (2.0 * q - 1.0));
        if !(self.s0 > floor) {
            return fail(format!("s0 > max(0, 2(2/p - 1)) = {floor} violated: s0 = {}", self.s0));
        }
        for (name, v) in [("s1", self.s1), ("s2", self.s2), ("s3", self.s3), ("s4", self.s4)] {
            if v > 2.0 * q + eps {
                return fail(format!("{name} <= 2/p violated: {name} = {v}"));
            }
        }
        let lower = -q.min(1.0 - q);
        if !(self.sigma > lower) {
            return fail(format!("sigma > -min(1/p, 1 - 1/p) = {lower} violated: sigma = {}", self.sigma));
        }
        if self.sigma1 < 0.0 || self.sigma2 < 0.0 {
            return fail(format!(
                "sigma1, sigma2 >= 0 violated: ({}, {})",
                self.sigma1, self.sigma2
            ));
        }
        Ok(())
    }

    fn index(&self, s: f64, sigma: f64) -> BesovIndex {
        BesovIndex {
            s,
            sigma,
            p: self.p,
            homogeneous: true,
        }
    }

    pub fn lhs_index(&self) -> BesovIndex {
        self.index(self.s0 - 2.0 / self.p, self.sigma)
    }

    /// Indices of `(f, g)` in the first and second right-hand terms.
    pub fn rhs_indices(&self) -> [(BesovIndex, BesovIndex); 2] {
        let q = 1.0 / self.p;
        [
            (
                self.index(self.s1, q - self.sigma1),
                self.index(self.s2, self.sigma + self.sigma1),
            ),
            (
                self.index(self.s3, self.sigma + self.sigma2),
                self.index(self.s4, q - self.sigma2),
            ),
        ]
    }

    /// `‖fg‖ / (‖f‖‖g‖ + ‖f‖‖g‖)`; `None` when the right side vanishes.
    pub fn ratio(&self, f: &SpectralField, g: &SpectralField) -> Result<Option<f64>> {
        let fg = pointwise_product(f, g)?;
        let lhs = besov_norm(&fg, &self.lhs_index())?;
        let mut rhs = 0.0;
        for (a, b) in self.rhs_indices() {
            rhs += besov_norm(f, &a)? * besov_norm(g, &b)?;
        }
        Ok(ratio_of(lhs, rhs))
    }
}

fn ratio_of(lhs: f64, rhs: f64) -> Option<f64> {
    if rhs > 0.0 {
        Some(lhs / rhs)
    } else if lhs == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Zero-order homogeneous Fourier multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplier {
    Identity,
    /// `−ξ_l ξ_m / |ξ|²`, `l, m ∈ {1, 2}`: a component of `∇_h div_h (−Δ)^{−1}`.
    GradDivH(u8, u8),
    /// `−ξ3 ξ_k / |ξ|²`: `∂3 ∂k (−Δ)^{−1}`.
    VerticalRiesz(u8),
    /// `i ξ_l / |ξ_h|`: a component of `∇_h / |∇_h|`.
    HorizontalRiesz(u8),
}

impl Multiplier {
    pub fn builtins() -> Vec<Multiplier> {
        let mut out = vec![Multiplier::Identity];
        for l in 1..=2 {
            for m in l..=2 {
                out.push(Multiplier::GradDivH(l, m));
            }
        }
        for k in 1..=3 {
            out.push(Multiplier::VerticalRiesz(k));
        }
        for l in 1..=2 {
            out.push(Multiplier::HorizontalRiesz(l));
        }
        out
    }

    pub fn parse(id: &str) -> Result<Self> {
        let bad = || AnsError::Domain(format!("unknown multiplier '{id}'"));
        let axes = |rest: &str, max: u8| -> Result<Vec<u8>> {
            rest.split(',')
                .map(|t| match t.trim().parse::<u8>() {
                    Ok(v) if (1..=max).contains(&v) => Ok(v),
                    _ => Err(bad()),
                })
                .collect()
        };
        if id == "identity" {
            return Ok(Multiplier::Identity);
        }
        let (name, rest) = id.split_once(':').ok_or_else(bad)?;
        match name {
            "grad-div-h" => match axes(rest, 2)?.as_slice() {
                [l, m] => Ok(Multiplier::GradDivH(*l, *m)),
                _ => Err(bad()),
            },
            "vertical-riesz" => match axes(rest, 3)?.as_slice() {
                [k] => Ok(Multiplier::VerticalRiesz(*k)),
                _ => Err(bad()),
            },
            "horizontal-riesz" => match axes(rest, 2)?.as_slice() {
                [l] => Ok(Multiplier::HorizontalRiesz(*l)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }

    /// Symbol value; zero where the symbol is undefined.
    pub fn symbol(&self, xi: [f64; 3]) -> Complex64 {
        let full = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let h = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let re = |v: f64| Complex64::new(v, 0.0);
        match *self {
            Multiplier::Identity => re(1.0),
            Multiplier::GradDivH(l, m) if full > 0.0 => re(-xi[l as usize - 1] * xi[m as usize - 1] / full),
            Multiplier::VerticalRiesz(k) if full > 0.0 => re(-xi[2] * xi[k as usize - 1] / full),
            Multiplier::HorizontalRiesz(l) if h > 0.0 => Complex64::new(0.0, xi[l as usize - 1] / h),
            _ => re(0.0),
        }
    }

    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        let mut out = f.clone();
        out.apply_symbol(|xi| self.symbol(xi));
        out
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplier::Identity => write!(out, "identity"),
            Multiplier::GradDivH(l, m) => write!(out, "grad-div-h:{l},{m}"),
            Multiplier::VerticalRiesz(k) => write!(out, "vertical-riesz:{k}"),
            Multiplier::HorizontalRiesz(l) => write!(out, "horizontal-riesz:{l}"),
        }
    }
}

/// Settings of the friction-damped heat ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatEnsemble {
    pub idx: BesovIndex,
    /// Friction `g(t) = rate·t`.
    pub rate: f64,
    pub beta: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl HeatEnsemble {
    pub fn standard(p: f64) -> Result<Self> {
        Ok(Self {
            idx: BesovIndex::critical(p)?,
            rate: 1.0,
            beta: 1.0,
            t_end: 1.0,
            steps: 100,
        })
    }
}

/// One estimate under test with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Estimate {
    Product(ProductExponents),
    /// `‖fg‖_{s,σ} ≤ C‖f‖_{s,σ}‖g‖_{2/p,1/p}`.
    SpecialProduct { s: f64, sigma: f64, p: f64 },
    Interpolation {
        first: (f64, f64),
        second: (f64, f64),
        theta: f64,
        p: f64,
    },
    Multiplier { multiplier: Multiplier, idx: BesovIndex },
    /// Inhomogeneous algebra `‖fg‖ ≤ C‖f‖‖g‖`.
    InhomogeneousAlgebra { s: f64, sigma: f64, p: f64 },
    MaximalRegularity(HeatEnsemble),
}

impl Estimate {
    pub fn id(&self) -> String {
        match self {
            Estimate::Product(_) => "product".into(),
            Estimate::SpecialProduct { .. } => "special-product".into(),
            Estimate::Interpolation { .. } => "interpolation".into(),
            Estimate::Multiplier { multiplier, .. } => format!("multiplier({multiplier})"),
            Estimate::InhomogeneousAlgebra { .. } => "inhomogeneous-algebra".into(),
            Estimate::MaximalRegularity(_) => "maximal-regularity".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Estimate::Product(e) => e.validate(),
            Estimate::SpecialProduct { s, sigma, p } => {
                let q = 1.0 / p;
                let s_lo = -(2.0 * q).min(2.0 * (1.0 - q));
                let sig_lo = -q.min(1.0 - q);
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(AnsError::Precondition(format!("1 <= p < inf violated: p = {p}")));
                }
                if !(s > s_lo && s <= 2.0 * q) {
                    return Err(AnsError::Precondition(format!(
                        "-min(2/p, 2(1 - 1/p)) < s <= 2/p violated: s = {s}"
                    )));
                }
                if !(sigma > sig_lo && sigma <= q) {
                    return Err(AnsError::Precondition(format!(
                        "-min(1/p, 1 - 1/p) < sigma <= 1/p violated: sigma = {sigma}"
                    )));
                }
                Ok(())
            }
            Estimate::Interpolation { theta, p, .. } => {
                if !(0.0..=1.0).contains(&theta) {
                    return Err(AnsError::Domain(format!("0 <= theta <= 1 violated: theta = {theta}")));
                }
                BesovIndex::homogeneous(0.0, 0.0, p).map(|_| ())
            }
            Estimate::Multiplier { idx, .. } => BesovIndex::new(idx.s, idx.sigma, idx.p, idx.homogeneous).map(|_| ()),
            Estimate::InhomogeneousAlgebra { s, sigma, p } => {
                if !(p >= 1.0) {
                    return Err(AnsError::Precondition(format!("p >= 1 violated: p = {p}")));
                }
                if !(s >= 2.0 / p) {
                    return Err(AnsError::Precondition(format!("s >= 2/p violated: s = {s}")));
                }
                if !(sigma >= 1.0 / p) {
                    return Err(AnsError::Precondition(format!("sigma >= 1/p violated: sigma = {sigma}")));
                }
                Ok(())
            }
            Estimate::MaximalRegularity(h) => {
                if !(h.t_end > 0.0) || h.steps == 0 || h.rate < 0.0 || h.beta < 0.0 {
                    return Err(AnsError::Domain("heat ensemble needs t_end > 0, steps > 0, rate, beta >= 0".into()));
                }
                Ok(())
            }
        }
    }

    /// Ratio for one trial; `None` marks a degenerate draw.
    pub fn trial_ratio(&self, spec: &EnsembleSpec, trial: u64) -> Result<Option<f64>> {
        let mut rng = trial_rng(spec.seed, trial);
        match *self {
            Estimate::Product(e) => {
                let f = spec.draw_scalar(&mut rng);
                let g = spec.draw_scalar(&mut rng);
                e.ratio(&f, &g)
            }
            Estimate::SpecialProduct { s, sigma, p } => {
                let f = spec.draw_scalar(&mut rng);
                let g = spec.draw_scalar(&mut rng);
                special_product_ratio(&f, &g, s, sigma, p)
            }
            Estimate::Interpolation {
                first,
                second,
                theta,
                p,
            } => {
                let f = spec.draw_scalar(&mut rng);
                interpolation_ratio(&f, first, second, theta, p)
            }
            Estimate::Multiplier { multiplier, idx } => {
                let f = spec.draw_scalar(&mut rng);
                let base = besov_norm(&f, &idx)?;
                let image = besov_norm(&multiplier.apply(&f), &idx)?;
                Ok(ratio_of(image, base))
            }
            Estimate::InhomogeneousAlgebra { s, sigma, p } => {
                let f = spec.draw_scalar(&mut rng);
                let g = spec.draw_scalar(&mut rng);
                inhomogeneous_ratio(&f, &g, s, sigma, p)
            }
            Estimate::MaximalRegularity(h) => {
                let v0 = spec.draw_scalar(&mut rng);
                let source = spec.draw_scalar(&mut rng);
                let sched = FrictionSchedule::linear(h.rate, h.beta, h.t_end, h.steps)?;
                let report = maximal_regularity_report(&v0, &Forcing::Constant(source), &sched, h.t_end, &h.idx)?;
                Ok(Some(report.ratio))
            }
        }
    }
}

pub fn special_product_ratio(f: &SpectralField, g: &SpectralField, s: f64, sigma: f64, p: f64) -> Result<Option<f64>> {
    let idx = BesovIndex::homogeneous(s, sigma, p)?;
    let top = BesovIndex::homogeneous(2.0 / p, 1.0 / p, p)?;
    let fg = pointwise_product(f, g)?;
    let gn = besov_norm(g, &top)?;
    if gn == 0.0 {
        // constant-like g carries no homogeneous norm
        return Ok(None);
    }
    Ok(ratio_of(besov_norm(&fg, &idx)?, besov_norm(f, &idx)? * gn))
}

pub fn interpolation_ratio(
    f: &SpectralField,
    first: (f64, f64),
    second: (f64, f64),
    theta: f64,
    p: f64,
) -> Result<Option<f64>> {
    let mid = BesovIndex::homogeneous(
        theta * first.0 + (1.0 - theta) * second.0,
        theta * first.1 + (1.0 - theta) * second.1,
        p,
    )?;
    let a = besov_norm(f, &BesovIndex::homogeneous(first.0, first.1, p)?)?;
    let b = besov_norm(f, &BesovIndex::homogeneous(second.0, second.1, p)?)?;
    let lhs = besov_norm(f, &mid)?;
    Ok(ratio_of(lhs, a.powf(theta) * b.powf(1.0 - theta)))
}

pub fn inhomogeneous_ratio(f: &SpectralField, g: &SpectralField, s: f64, sigma: f64, p: f64) -> Result<Option<f64>> {
    let idx = BesovIndex::inhomogeneous(s, sigma, p)?;
    let fg = pointwise_product(f, g)?;
    Ok(ratio_of(
        besov_norm(&fg, &idx)?,
        besov_norm(f, &idx)? * besov_norm(g, &idx)?,
    ))
}

/// Enough to rerun the worst trial on its own.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialDescriptor {
    pub seed: u64,
    pub trial: u64,
    pub band: (i32, i32, i32, i32),
    pub n: [usize; 3],
    pub lengths: [f64; 3],
}

impl fmt::Display for TrialDescriptor {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c, d) = self.band;
        write!(
            out,
            "seed={} trial={} band={a},{b},{c},{d} n={}x{}x{} lengths={},{},{}",
            self.seed,
            self.trial,
            self.n[0],
            self.n[1],
            self.n[2],
            fmt_f64(self.lengths[0]),
            fmt_f64(self.lengths[1]),
            fmt_f64(self.lengths[2])
        )
    }
}

impl TrialDescriptor {
    /// Single-trial ensemble reproducing this draw.
    pub fn ensemble(&self) -> Result<(EnsembleSpec, u64)> {
        let grid = Grid::new(self.n, self.lengths)?;
        Ok((EnsembleSpec::new(1, self.seed, self.band, grid)?, self.trial))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub lemma: String,
    pub trials: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub worst: Option<TrialDescriptor>,
    /// Ratio per trial, `None` for skipped draws.
    pub ratios: Vec<Option<f64>>,
}

impl EstimateReport {
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["trial", "ratio"]);
        for (i, r) in self.ratios.iter().enumerate() {
            t.push_row(vec![
                i.to_string(),
                r.map(fmt_f64).unwrap_or_else(|| "skipped".into()),
            ]);
        }
        t
    }

    pub fn summary(&self) -> String {
        let worst = self
            .worst
            .map(|w| w.to_string())
            .unwrap_or_else(|| "none".into());
        format!(
            "lemma: {}\ntrials: {}\nskipped: {}\nmax_ratio: {}\nmedian_ratio: {}\nworst: {}\n",
            self.lemma,
            self.trials,
            self.skipped,
            fmt_f64(self.max_ratio),
            fmt_f64(self.median_ratio),
            worst
        )
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Runs every trial (in parallel, results in trial order).
pub fn run_estimate(spec: &EnsembleSpec, estimate: &Estimate) -> Result<EstimateReport> {
    spec.validate()?;
    estimate.validate()?;
    let ratios: Vec<Option<f64>> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|t| estimate.trial_ratio(spec, t))
        .collect::<Result<_>>()?;
    let mut valid: Vec<(u64, f64)> = ratios
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|v| (i as u64, v)))
        .collect();
    if let Some((_, v)) = valid.iter().find(|(_, v)| !v.is_finite()) {
        return Err(AnsError::Inconsistent(format!("non-finite ratio {v}")));
    }
    let worst = valid
        .iter()
        .copied()
        .fold(None, |acc: Option<(u64, f64)>, (i, v)| match acc {
            Some((_, best)) if best >= v => acc,
            _ => Some((i, v)),
        });
    valid.sort_by(|a, b| a.1.total_cmp(&b.1));
    let sorted: Vec<f64> = valid.iter().map(|x| x.1).collect();
    Ok(EstimateReport {
        lemma: estimate.id(),
        trials: sorted.len(),
        skipped: ratios.len() - sorted.len(),
        max_ratio: worst.map(|w| w.1).unwrap_or(0.0),
        median_ratio: median(&sorted),
        worst: worst.map(|(trial, _)| TrialDescriptor {
            seed: spec.seed,
            trial,
            band: spec.band,
            n: spec.grid.n(),
            lengths: spec.grid.lengths(),
        }),
        ratios,
    })
}

pub fn check_product_estimate(spec: &EnsembleSpec, exponents: ProductExponents) -> Result<EstimateReport> {
    run_estimate(spec, &Estimate::Product(exponents))
}

pub fn check_special_product(spec: &EnsembleSpec, s: f64, sigma: f64, p: f64) -> Result<EstimateReport> {
    run_estimate(spec, &Estimate::SpecialProduct { s, sigma, p })
}

pub fn check_interpolation(
    spec: &EnsembleSpec,
    first: (f64, f64),
    second: (f64, f64),
    theta: f64,
    p: f64,
) -> Result<EstimateReport> {
    run_estimate(
        spec,
        &Estimate::Interpolation {
            first,
            second,
            theta,
            p,
        },
    )
}

pub fn check_multiplier(spec: &EnsembleSpec, multiplier: Multiplier, idx: BesovIndex) -> Result<EstimateReport> {
    run_estimate(spec, &Estimate::Multiplier { multiplier, idx })
}

pub fn check_inhomo_algebra(spec: &EnsembleSpec, s: f64, sigma: f64, p: f64) -> Result<EstimateReport> {
    run_estimate(spec, &Estimate::InhomogeneousAlgebra { s, sigma, p })
}

pub fn check_maximal_regularity(spec: &EnsembleSpec, heat: HeatEnsemble) -> Result<EstimateReport> {
    run_estimate(spec, &Estimate::MaximalRegularity(heat))
}

/// `C0`: the largest measured constant, at least 1.
pub fn combined_constant(reports: &[&EstimateReport]) -> f64 {
    reports.iter().map(|r| r.max_ratio).fold(1.0, f64::max)
}

/// Runs the estimates entering the a priori bound (product, special product,
/// every built-in multiplier, maximal regularity) at `p = 2` and returns
/// their reports.
pub fn constant_suite(spec: &EnsembleSpec) -> Result<Vec<EstimateReport>> {
    let idx = BesovIndex::critical(2.0)?;
    let mut out = vec![
        check_product_estimate(spec, ProductExponents::standard())?,
        check_special_product(spec, idx.s, idx.sigma, 2.0)?,
    ];
    for m in Multiplier::builtins() {
        out.push(check_multiplier(spec, m, idx)?);
    }
    out.push(check_maximal_regularity(spec, HeatEnsemble::standard(2.0)?)?);
    Ok(out)
}

/// [`combined_constant`] over [`constant_suite`].
pub fn measure_c0(spec: &EnsembleSpec) -> Result<f64> {
    let reports = constant_suite(spec)?;
    Ok(combined_constant(&reports.iter().collect::<Vec<_>>()))
}

/// Vector variant of the multiplier ratio, for the same symbol on every
/// component.
pub fn multiplier_ratio_vector(m: Multiplier, components: &[&SpectralField], idx: &BesovIndex) -> Result<Option<f64>> {
    let images: Vec<SpectralField> = components.iter().map(|c| m.apply(c)).collect();
    let refs: Vec<&SpectralField> = images.iter().collect();
    Ok(ratio_of(
        besov_norm_vector(&refs, idx)?,
        besov_norm_vector(components, idx)?,
    ))
}
