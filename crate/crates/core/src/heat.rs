//! Horizontal heat flow with a time-dependent friction term,
//! `∂_t v + β g′(t) v − Δ_h v = G`, solved mode by mode.

use ndarray::Array3;
use num_complex::Complex64;

use crate::besov::{trapezoid, BesovIndex};
use crate::error::{AnsError, Result};
use crate::field::SpectralField;
use crate::littlewood_paley::BlockPlan;

/// `e^{tΔ_h} f`.
pub fn heat_propagate(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(AnsError::Domain(format!("heat time must be >= 0, got {t}")));
    }
    let mut out = f.clone();
    if t > 0.0 {
        out.apply_real_symbol(|xi| (-t * (xi[0] * xi[0] + xi[1] * xi[1])).exp());
    }
    Ok(out)
}

/// Sampled friction profile `g` with derivative `g′` and weight `β`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrictionSchedule {
    times: Vec<f64>,
    g: Vec<f64>,
    gprime: Vec<f64>,
    beta: f64,
}

impl FrictionSchedule {
    pub fn new(times: Vec<f64>, g: Vec<f64>, gprime: Vec<f64>, beta: f64) -> Result<Self> {
        let n = times.len();
        if n < 2 || g.len() != n || gprime.len() != n {
            return Err(AnsError::Domain(
                "schedule needs at least two samples of t, g, g' of equal length".into(),
            ));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(AnsError::Domain(
                "schedule times must start at 0 and increase".into(),
            ));
        }
        if !(beta >= 0.0) {
            return Err(AnsError::Domain(format!("beta must be >= 0, got {beta}")));
        }
        if g[0] != 0.0 {
            return Err(AnsError::Domain(format!("g(0) must be 0, got {}", g[0])));
        }
        if let Some(v) = gprime.iter().find(|v| !(**v >= 0.0)) {
            return Err(AnsError::Domain(format!("g' must be >= 0, found {v}")));
        }
        let mut acc = 0.0;
        for i in 1..n {
            acc += 0.5 * (times[i] - times[i - 1]) * (gprime[i] + gprime[i - 1]);
            if (acc - g[i]).abs() > 1e-8 * g[i].abs().max(1.0) {
                return Err(AnsError::Domain(format!(
                    "g does not match the integral of g' at t = {} ({} vs {acc})",
                    times[i], g[i]
                )));
            }
        }
        Ok(Self {
            times,
            g,
            gprime,
            beta,
        })
    }

    /// Uniform samples of `[0, t_end]` with `steps` intervals.
    pub fn from_fn(
        t_end: f64,
        steps: usize,
        g: impl Fn(f64) -> f64,
        gprime: impl Fn(f64) -> f64,
        beta: f64,
    ) -> Result<Self> {
        if steps == 0 || !(t_end > 0.0) {
            return Err(AnsError::Domain("need t_end > 0 and steps > 0".into()));
        }
        let times: Vec<f64> = (0..=steps)
            .map(|i| t_end * i as f64 / steps as f64)
            .collect();
        let gv = times.iter().map(|&t| g(t)).collect();
        let gp = times.iter().map(|&t| gprime(t)).collect();
        Self::new(times, gv, gp, beta)
    }

    /// `g(t) = rate·t`.
    pub fn linear(rate: f64, beta: f64, t_end: f64, steps: usize) -> Result<Self> {
        Self::from_fn(t_end, steps, |t| rate * t, |_| rate, beta)
    }

    /// No friction on a uniform grid.
    pub fn none(t_end: f64, steps: usize) -> Result<Self> {
        Self::linear(0.0, 0.0, t_end, steps)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn gprime(&self) -> &[f64] {
        &self.gprime
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("at least two samples")
    }

    /// Number of schedule samples in `[0, t]`.
    fn samples_up_to(&self, t: f64) -> Result<usize> {
        let end = self.t_end();
        if !(t >= 0.0) || t > end * (1.0 + 1e-12) {
            return Err(AnsError::Domain(format!(
                "T = {t} outside the schedule domain [0, {end}]"
            )));
        }
        Ok(self
            .times
            .iter()
            .take_while(|&&s| s <= t * (1.0 + 1e-12) + 1e-300)
            .count())
    }
}

/// Source term of the heat equation, sampled on the schedule grid.
#[derive(Clone, Debug)]
pub enum Forcing {
    None,
    /// Time-independent `G`.
    Constant(SpectralField),
    /// `G(t_n) = q_n G_0`.
    Separable { profile: Vec<f64>, field: SpectralField },
    /// One field per schedule sample.
    Sampled(Vec<SpectralField>),
}

impl Forcing {
    fn check(&self, v0: &SpectralField, samples: usize) -> Result<()> {
        match self {
            Forcing::None => Ok(()),
            Forcing::Constant(f) => v0.check_same_grid(f),
            Forcing::Separable { profile, field } => {
                v0.check_same_grid(field)?;
                if profile.len() < samples {
                    return Err(AnsError::Domain("forcing profile shorter than schedule".into()));
                }
                Ok(())
            }
            Forcing::Sampled(fs) => {
                if fs.len() < samples {
                    return Err(AnsError::Domain("forcing samples shorter than schedule".into()));
                }
                fs.iter().try_for_each(|f| v0.check_same_grid(f))
            }
        }
    }

    /// Coefficient of mode `idx` at sample `n`.
    #[inline]
    fn coeff(&self, n: usize, idx: usize) -> Complex64 {
        match self {
            Forcing::None => Complex64::new(0.0, 0.0),
            Forcing::Constant(f) => f.data()[idx],
            Forcing::Separable { profile, field } => field.data()[idx] * profile[n],
            Forcing::Sampled(fs) => fs[n].data()[idx],
        }
    }

    /// The field at sample `n`.
    pub fn at(&self, n: usize, grid: crate::grid::Grid) -> SpectralField {
        match self {
            Forcing::None => SpectralField::zeros(grid),
            Forcing::Constant(f) => f.clone(),
            Forcing::Separable { profile, field } => field.scaled(profile[n]),
            Forcing::Sampled(fs) => fs[n].clone(),
        }
    }
}

/// Weights `(w_n, w_{n+1})` of `∫_0^h e^{-cs} G(t_{n+1} - s) ds` for `G`
/// linear on the step, with `z = c h`.
fn step_weights(h: f64, z: f64) -> (f64, f64) {
    if z.abs() < 1e-2 {
        // series in z
        let mut a = 0.0; // (1 - e^{-z}(1+z))/z²
        let mut b = 0.0; // (1 - e^{-z})/z
        let mut zk = 1.0;
        let mut fact = 1.0; // (k+1)!
        for k in 0..12 {
            fact *= (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            b += sign * zk / fact;
            a += sign * zk * (k + 1) as f64 / (fact * (k + 2) as f64);
            zk *= z;
        }
        let w0 = h * a;
        (w0, h * b - w0)
    } else {
        let e = (-z).exp();
        let w0 = h * (1.0 - e * (1.0 + z)) / (z * z);
        (w0, h * (-(-z).exp_m1()) / z - w0)
    }
}

/// Streams `v(t_n)` for every schedule sample in `[0, T]`: the homogeneous
/// part is exact, the Duhamel integral uses exponential product integration
/// with the source and `g` linear on each step.
pub fn friction_propagate_with(
    v0: &SpectralField,
    forcing: &Forcing,
    sched: &FrictionSchedule,
    t_end: f64,
    mut visit: impl FnMut(usize, f64, &SpectralField) -> Result<()>,
) -> Result<()> {
    let samples = sched.samples_up_to(t_end)?;
    forcing.check(v0, samples)?;
    let grid = *v0.grid();
    let (n0, n1, n2) = grid.shape();
    let k0 = grid.wavenumbers(0);
    let k1 = grid.wavenumbers(1);
    let lap: Vec<f64> = (0..n0 * n1)
        .map(|q| k0[q / n1].powi(2) + k1[q % n1].powi(2))
        .collect();
    let beta = sched.beta;
    let mut duhamel = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut out = SpectralField::zeros(grid);
    let has_source = !matches!(forcing, Forcing::None);
    for n in 0..samples {
        let t = sched.times[n];
        if n > 0 && has_source {
            let h = t - sched.times[n - 1];
            let dg = sched.g[n] - sched.g[n - 1];
            let slope = dg / h;
            for (q, a) in lap.iter().enumerate() {
                let c = a + beta * slope;
                let decay = (-(a * h) - beta * dg).exp();
                let (w0, w1) = step_weights(h, c * h);
                for l in 0..n2 {
                    let idx = q * n2 + l;
                    duhamel[idx] = duhamel[idx] * decay
                        + forcing.coeff(n - 1, idx) * w0
                        + forcing.coeff(n, idx) * w1;
                }
            }
        }
        let friction = (-beta * sched.g[n]).exp();
        {
            let src = v0.data();
            let dst = out.data_mut();
            for (q, a) in lap.iter().enumerate() {
                let factor = friction * (-a * t).exp();
                for l in 0..n2 {
                    let idx = q * n2 + l;
                    dst[idx] = src[idx] * factor + duhamel[idx];
                }
            }
        }
        visit(n, t, &out)?;
    }
    Ok(())
}

/// Sampled solution `v(t_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

pub fn friction_propagate(
    v0: &SpectralField,
    forcing: &Forcing,
    sched: &FrictionSchedule,
    t_end: f64,
) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut fields = Vec::new();
    friction_propagate_with(v0, forcing, sched, t_end, |_, t, v| {
        times.push(t);
        fields.push(v.clone());
        Ok(())
    })?;
    Ok(Trajectory { times, fields })
}

/// Both sides of the maximal-regularity estimate with unit constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxRegularityReport {
    /// `sup_t ‖v‖_{s,σ}`
    pub sup_norm: f64,
    /// `∫ ‖v‖_{s+2,σ} dt`
    pub dissipation: f64,
    /// `β ∫ ‖v‖_{s,σ} g′ dt`
    pub friction: f64,
    /// `‖v0‖_{s,σ}`
    pub data: f64,
    /// `∫ ‖G‖_{s,σ} dt`
    pub source: f64,
    pub ratio: f64,
}

impl MaxRegularityReport {
    pub fn lhs(&self) -> f64 {
        self.sup_norm + self.dissipation + self.friction
    }

    pub fn rhs(&self) -> f64 {
        self.data + self.source
    }
}

pub fn maximal_regularity_report(
    v0: &SpectralField,
    forcing: &Forcing,
    sched: &FrictionSchedule,
    t_end: f64,
    idx: &BesovIndex,
) -> Result<MaxRegularityReport> {
    let grid = *v0.grid();
    let plan = BlockPlan::standard(grid, idx.homogeneous);
    let mut times = Vec::new();
    let mut base = Vec::new();
    let mut smooth = Vec::new();
    friction_propagate_with(v0, forcing, sched, t_end, |_, t, v| {
        let blocks = plan.decompose(&[v], idx.p)?;
        times.push(t);
        base.push(blocks.weighted_sum(idx.s, idx.sigma));
        smooth.push(blocks.weighted_sum(idx.s + 2.0, idx.sigma));
        Ok(())
    })?;
    let samples = times.len();
    let gp: Vec<f64> = base
        .iter()
        .zip(&sched.gprime[..samples])
        .map(|(b, g)| b * g)
        .collect();
    let source_norms: Vec<f64> = match forcing {
        Forcing::None => vec![0.0; samples],
        Forcing::Constant(f) => {
            let v = plan.decompose(&[f], idx.p)?.weighted_sum(idx.s, idx.sigma);
            vec![v; samples]
        }
        Forcing::Separable { profile, field } => {
            let v = plan.decompose(&[field], idx.p)?.weighted_sum(idx.s, idx.sigma);
            profile[..samples].iter().map(|q| q.abs() * v).collect()
        }
        Forcing::Sampled(fs) => fs[..samples]
            .iter()
            .map(|f| Ok(plan.decompose(&[f], idx.p)?.weighted_sum(idx.s, idx.sigma)))
            .collect::<Result<_>>()?,
    };
    let sup_norm = base.iter().fold(0.0f64, |m, v| m.max(*v));
    let dissipation = trapezoid(&times, &smooth);
    let friction = sched.beta * trapezoid(&times, &gp);
    let data = base[0];
    let source = trapezoid(&times, &source_norms);
    let lhs = sup_norm + dissipation + friction;
    let rhs = data + source;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        return Err(AnsError::Inconsistent(format!(
            "left side {lhs} is positive while data and source vanish"
        )));
    };
    Ok(MaxRegularityReport {
        sup_norm,
        dissipation,
        friction,
        data,
        source,
        ratio,
    })
}

/// Per-mode magnitudes, used to check monotone damping.
pub fn mode_magnitudes(f: &SpectralField) -> Array3<f64> {
    f.coeffs().mapv(|c| c.norm())
}
