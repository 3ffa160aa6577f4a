//! Pseudo-spectral time stepping of the frequency-cutoff system
//! `∂_t u − Δ_h u + P_N[(u·∇)u] + ∇P = 0`, `div u = 0`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::besov::{trapezoid, LambdaSet};
use crate::error::{AnsError, Result};
use crate::fft::Fft3;
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::io::{fmt_f64, CsvTable};
use crate::littlewood_paley::BlockPlan;
use crate::spectral::{frequency_cutoff_in_place, leray_project_in_place};

/// Coefficient magnitude treated as blow-up.
pub const BLOW_UP_LIMIT: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    /// Radius `N` of the frequency cutoff; `f64::INFINITY` disables it.
    pub cutoff: f64,
    /// Largest step; the actual step may be smaller under the CFL bound.
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// When false every step uses `dt` exactly (up to landing on sample times).
    pub adaptive: bool,
    /// Time between diagnostic samples; zero samples every step.
    pub sample_interval: f64,
    /// Highest time-derivative order available through [`time_derivatives`].
    pub max_time_order: usize,
}

impl SolverConfig {
    pub fn new(grid: Grid, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            cutoff: f64::INFINITY,
            dt,
            t_end,
            cfl_safety: 0.5,
            adaptive: true,
            sample_interval: 0.0,
            max_time_order: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff.is_nan() || self.cutoff <= 0.0 {
            return Err(AnsError::Domain(format!("cutoff N must be positive, got {}", self.cutoff)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(AnsError::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(AnsError::Domain(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(AnsError::Domain(format!(
                "cfl_safety must lie in (0, 1), got {}",
                self.cfl_safety
            )));
        }
        if !(self.sample_interval >= 0.0) {
            return Err(AnsError::Domain("sample_interval must be >= 0".into()));
        }
        Ok(())
    }

    /// Smallest grid spacing.
    pub fn min_spacing(&self) -> f64 {
        (0..3).map(|a| self.grid.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    /// `min(dt, cfl·h/max|u|)`.
    pub fn stable_dt(&self, max_velocity: f64) -> f64 {
        if !self.adaptive || max_velocity <= 0.0 {
            self.dt
        } else {
            self.dt.min(self.cfl_safety * self.min_spacing() / max_velocity)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: VectorField,
    pub steps: usize,
}

impl SimState {
    pub fn new(u: VectorField) -> Self {
        Self { t: 0.0, u, steps: 0 }
    }
}

/// Numerical blow-up, with the last state that passed the checks.
#[derive(Clone, Debug)]
pub struct BlowUp {
    pub t: f64,
    pub reason: String,
    pub last_valid: SimState,
}

impl From<Box<BlowUp>> for AnsError {
    fn from(b: Box<BlowUp>) -> Self {
        AnsError::BlowUp {
            t: b.t,
            reason: b.reason,
        }
    }
}

/// Real physical samples of a field and of its nine first derivatives.
struct Physical {
    vel: [Vec<f64>; 3],
    /// `grad[i][j] = ∂_j u_i`
    grad: [[Vec<f64>; 3]; 3],
}

fn inverse_real(f: &SpectralField, derivative: Option<usize>) -> Vec<f64> {
    let grid = *f.grid();
    let mut data = f.data().to_vec();
    if let Some(axis) = derivative {
        let (_, n1, n2) = grid.shape();
        let k = grid.wavenumbers(axis);
        for (idx, c) in data.iter_mut().enumerate() {
            let i = match axis {
                0 => idx / (n1 * n2),
                1 => (idx / n2) % n1,
                _ => idx % n2,
            };
            *c *= Complex64::new(0.0, k[i]);
        }
    }
    Fft3::for_shape(grid.n()).inverse(&mut data);
    data.into_iter().map(|c| c.re).collect()
}

impl Physical {
    fn of(u: &VectorField) -> Self {
        let jobs: Vec<(usize, Option<usize>)> = (0..3)
            .flat_map(|i| std::iter::once((i, None)).chain((0..3).map(move |j| (i, Some(j)))))
            .collect();
        let mut out: Vec<Vec<f64>> = jobs
            .par_iter()
            .map(|&(i, d)| inverse_real(u.component(i), d))
            .collect();
        // jobs order: (0,None),(0,0),(0,1),(0,2),(1,None),...
        let mut take = |k: usize| std::mem::take(&mut out[k]);
        let mut vel: [Vec<f64>; 3] = Default::default();
        let mut grad: [[Vec<f64>; 3]; 3] = Default::default();
        for i in 0..3 {
            vel[i] = take(4 * i);
            for j in 0..3 {
                grad[i][j] = take(4 * i + 1 + j);
            }
        }
        Self { vel, grad }
    }
}

/// Adds `c·(a·∇)b` to `acc` in physical space.
fn accumulate_advection(acc: &mut [Vec<f64>; 3], c: f64, a: &Physical, b: &Physical) {
    for (i, out) in acc.iter_mut().enumerate() {
        let g = &b.grad[i];
        for (q, o) in out.iter_mut().enumerate() {
            *o += c * (a.vel[0][q] * g[0][q] + a.vel[1][q] * g[1][q] + a.vel[2][q] * g[2][q]);
        }
    }
}

/// `−Leray P_N D(acc)` for physical samples `acc`.
fn project_physical(grid: Grid, acc: [Vec<f64>; 3], cutoff: f64) -> VectorField {
    let comps: Vec<SpectralField> = acc
        .into_par_iter()
        .map(|v| {
            let mut data: Vec<Complex64> = v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            Fft3::for_shape(grid.n()).forward(&mut data);
            let arr = ndarray::Array3::from_shape_vec(grid.shape(), data).expect("grid shape");
            let mut f = SpectralField::from_coeffs(grid, arr).expect("grid shape");
            f.dealias();
            f.symmetrize_hermitian();
            f.scale(-1.0);
            f
        })
        .collect();
    let mut it = comps.into_iter();
    let mut out = VectorField::new(
        it.next().expect("three"),
        it.next().expect("three"),
        it.next().expect("three"),
    )
    .expect("shared grid");
    frequency_cutoff_in_place(&mut out, cutoff);
    leray_project_in_place(&mut out);
    out
}

fn zero_samples(grid: &Grid) -> [Vec<f64>; 3] {
    [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]]
}

/// `−Leray P_N D[(u·∇)u]`.
pub fn nonlinear_rhs(u: &VectorField, cutoff: f64) -> Result<VectorField> {
    if cutoff.is_nan() || cutoff <= 0.0 {
        return Err(AnsError::Domain(format!("cutoff N must be positive, got {cutoff}")));
    }
    Ok(nonlinear(u, cutoff))
}

fn nonlinear(u: &VectorField, cutoff: f64) -> VectorField {
    let grid = *u.grid();
    if u.is_zero() {
        return VectorField::zeros(grid);
    }
    let phys = Physical::of(u);
    let mut acc = zero_samples(&grid);
    accumulate_advection(&mut acc, 1.0, &phys, &phys);
    project_physical(grid, acc, cutoff)
}

/// Gradient of the pressure split `P = P1 + P2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureGradient {
    /// `∇_h P1`
    pub grad_p1: [SpectralField; 2],
    /// `∇_h P2`
    pub grad_p2: [SpectralField; 2],
    /// `∂_3 (P1 + P2)`
    pub dp_dx3: SpectralField,
}

impl PressureGradient {
    /// `∇(P1 + P2)` as a vector field.
    pub fn total(&self) -> VectorField {
        VectorField::new(
            self.grad_p1[0].add(&self.grad_p2[0]),
            self.grad_p1[1].add(&self.grad_p2[1]),
            self.dp_dx3.clone(),
        )
        .expect("shared grid")
    }
}

/// Dealiased spectral transform of real samples.
fn forward_real(grid: Grid, v: &[f64]) -> SpectralField {
    let mut data: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Fft3::for_shape(grid.n()).forward(&mut data);
    let arr = ndarray::Array3::from_shape_vec(grid.shape(), data).expect("grid shape");
    let mut f = SpectralField::from_coeffs(grid, arr).expect("grid shape");
    f.dealias();
    f
}

/// Tolerance on `max|ξ·û| / max|û|` for pressure inputs.
pub const PRESSURE_DIVERGENCE_TOL: f64 = 1e-8;

/// `P1 = Σ_{ℓ,m≤2} ∂_ℓ∂_m(−Δ)^{-1}(u_ℓ u_m)` and
/// `P2 = 2∂_3(−Δ)^{-1}(u_h·∇_h u_3)`.
pub fn pressure_decompose(u: &VectorField) -> Result<PressureGradient> {
    let ratio = u.divergence_ratio();
    if ratio > PRESSURE_DIVERGENCE_TOL {
        return Err(AnsError::Precondition(format!(
            "pressure split needs a divergence-free field (max|xi.u|/max|u| = {ratio:.3e})"
        )));
    }
    let grid = *u.grid();
    let phys = Physical::of(u);
    let n = grid.len();
    let v = &phys.vel;
    // products u_ℓ u_m, ℓ ≤ m ≤ 2, and u_h·∇_h u_3
    let prod = |a: usize, b: usize| -> Vec<f64> { (0..n).map(|q| v[a][q] * v[b][q]).collect() };
    let uu = [prod(0, 0), prod(0, 1), prod(1, 1)];
    let adv3: Vec<f64> = (0..n)
        .map(|q| v[0][q] * phys.grad[2][0][q] + v[1][q] * phys.grad[2][1][q])
        .collect();
    let s11 = forward_real(grid, &uu[0]);
    let s12 = forward_real(grid, &uu[1]);
    let s22 = forward_real(grid, &uu[2]);
    let s3 = forward_real(grid, &adv3);

    let k = [grid.wavenumbers(0), grid.wavenumbers(1), grid.wavenumbers(2)];
    let mut p1 = SpectralField::zeros(grid);
    let mut p2 = SpectralField::zeros(grid);
    {
        let (a, b, c, d) = (s11.coeffs(), s12.coeffs(), s22.coeffs(), s3.coeffs());
        let p2c = p2.coeffs_mut();
        for ((i, j, l), out) in p1.coeffs_mut().indexed_iter_mut() {
            let xi = [k[0][i], k[1][j], k[2][l]];
            let norm2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            if norm2 == 0.0 {
                continue;
            }
            let ix = (i, j, l);
            *out = -(a[ix] * (xi[0] * xi[0]) + b[ix] * (2.0 * xi[0] * xi[1]) + c[ix] * (xi[1] * xi[1]))
                / norm2;
            p2c[ix] = d[ix] * Complex64::new(0.0, 2.0 * xi[2] / norm2);
        }
    }
    let grad = |f: &SpectralField, axis: usize| -> SpectralField {
        f.map_symbol(|xi| Complex64::new(0.0, xi[axis]))
    };
    let mut dp = grad(&p1, 2);
    dp.axpy(1.0, &grad(&p2, 2));
    Ok(PressureGradient {
        grad_p1: [grad(&p1, 0), grad(&p1, 1)],
        grad_p2: [grad(&p2, 0), grad(&p2, 1)],
        dp_dx3: dp,
    })
}

/// Multiplies every component by `e^{−τ|ξ_h|²}`.
fn heat_factor(u: &VectorField, tau: f64) -> VectorField {
    u.map(|c| {
        let mut c = c.clone();
        c.apply_real_symbol(|xi| (-tau * (xi[0] * xi[0] + xi[1] * xi[1])).exp());
        c
    })
}

/// Integrating-factor RK4 step of size `dt` from `state`.
pub fn step_with(state: &SimState, dt: f64, cutoff: f64) -> std::result::Result<SimState, Box<BlowUp>> {
    let u = &state.u;
    let half = 0.5 * dt;
    let a = nonlinear(u, cutoff);
    // b = N(E_h(u + dt/2 a))
    let mut tmp = u.clone();
    tmp.axpy(half, &a);
    let eh_u_a = heat_factor(&tmp, half);
    let b = nonlinear(&eh_u_a, cutoff);
    // c = N(E_h u + dt/2 b)
    let eh_u = heat_factor(u, half);
    let mut tmp = eh_u.clone();
    tmp.axpy(half, &b);
    let c = nonlinear(&tmp, cutoff);
    // d = N(E u + dt E_h c)
    let e_u = heat_factor(u, dt);
    let mut tmp = e_u.clone();
    tmp.axpy(dt, &heat_factor(&c, half));
    let d = nonlinear(&tmp, cutoff);
    // u+ = E u + dt/6 (E a + 2 E_h (b + c) + d)
    let mut bc = b;
    bc.axpy(1.0, &c);
    let mut incr = heat_factor(&a, dt);
    incr.axpy(2.0, &heat_factor(&bc, half));
    incr.axpy(1.0, &d);
    let mut next = e_u;
    next.axpy(dt / 6.0, &incr);
    leray_project_in_place(&mut next);
    next.dealias();
    let t = state.t + dt;
    if !next.all_finite_below(BLOW_UP_LIMIT) {
        return Err(Box::new(BlowUp {
            t,
            reason: format!("coefficient NaN or above {BLOW_UP_LIMIT:e}"),
            last_valid: state.clone(),
        }));
    }
    Ok(SimState {
        t,
        u: next,
        steps: state.steps + 1,
    })
}

/// One step with the configured (possibly CFL-limited) step size.
pub fn step(state: &SimState, cfg: &SolverConfig) -> std::result::Result<SimState, Box<BlowUp>> {
    let dt = cfg.stable_dt(state.u.max_velocity());
    step_with(state, dt, cfg.cutoff)
}

/// `∂_t^n u` for `n = 0..=order`, by `∂_t^{n+1}u = Δ_h ∂_t^n u +
/// Σ_m C(n,m) N(∂_t^m u, ∂_t^{n−m} u)` with `N` the projected bilinear term.
pub fn time_derivatives(u: &VectorField, order: usize, cutoff: f64) -> Result<Vec<VectorField>> {
    if cutoff.is_nan() || cutoff <= 0.0 {
        return Err(AnsError::Domain(format!("cutoff N must be positive, got {cutoff}")));
    }
    let grid = *u.grid();
    let mut out = vec![u.clone()];
    let mut phys: Vec<Physical> = Vec::with_capacity(order + 1);
    for n in 0..order {
        phys.push(Physical::of(&out[n]));
        let mut acc = zero_samples(&grid);
        let mut binom = 1.0;
        for m in 0..=n {
            accumulate_advection(&mut acc, binom, &phys[m], &phys[n - m]);
            binom = binom * (n - m) as f64 / (m + 1) as f64;
        }
        let mut next = project_physical(grid, acc, cutoff);
        let lap = out[n].map(|c| c.map_symbol(|xi| Complex64::new(-(xi[0] * xi[0] + xi[1] * xi[1]), 0.0)));
        next.axpy(1.0, &lap);
        out.push(next);
    }
    Ok(out)
}

/// `∂_t^α u`, failing when `α` exceeds `max_order`.
pub fn time_derivative(u: &VectorField, alpha: usize, cutoff: f64, max_order: usize) -> Result<VectorField> {
    if alpha > max_order {
        return Err(AnsError::Domain(format!(
            "time-derivative order {alpha} exceeds the configured maximum {max_order}"
        )));
    }
    Ok(time_derivatives(u, alpha, cutoff)?.pop().expect("order + 1 entries"))
}

/// `‖∇_h u‖²_{L²}`.
pub fn horizontal_enstrophy(u: &VectorField) -> f64 {
    let vol = u.grid().volume();
    let k0 = u.grid().wavenumbers(0);
    let k1 = u.grid().wavenumbers(1);
    let mut sum = 0.0;
    for c in u.components() {
        for ((i, j, _), v) in c.coeffs().indexed_iter() {
            sum += (k0[i] * k0[i] + k1[j] * k1[j]) * v.norm_sqr();
        }
    }
    vol * sum
}

/// One diagnostics row.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    pub energy: f64,
    pub max_velocity: f64,
    /// `‖u_h‖` for every horizontal index, then `‖u_3‖` for every vertical one.
    pub norms: Vec<f64>,
    /// Cumulative `∫‖u_h‖_{s+2,σ}` and `∫‖u_3‖_{s+2,σ}`, same order.
    pub dissipation: Vec<f64>,
}

/// Tracks the data-class norms along a run.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    lam_h: LambdaSet,
    lam_v: LambdaSet,
    rows: Vec<DiagnosticRow>,
    /// Instantaneous `‖·‖_{s+2,σ}` at each row, for the running integrals.
    smooth: Vec<Vec<f64>>,
}

impl Diagnostics {
    pub fn new(lam_h: LambdaSet, lam_v: LambdaSet) -> Self {
        Self {
            lam_h,
            lam_v,
            rows: Vec::new(),
            smooth: Vec::new(),
        }
    }

    pub fn standard() -> Self {
        Self::new(
            LambdaSet::horizontal(2.0, 0.5).expect("valid"),
            LambdaSet::vertical(2.0, 0.5).expect("valid"),
        )
    }

    pub fn rows(&self) -> &[DiagnosticRow] {
        &self.rows
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string(), "energy".into(), "max_velocity".into()];
        let name = |pre: &str, s: f64, sg: f64| format!("{pre}_s{s:.4}_sigma{sg:.4}");
        let entries = || {
            self.lam_h
                .entries()
                .iter()
                .map(|e| ("uh", *e))
                .chain(self.lam_v.entries().iter().map(|e| ("u3", *e)))
        };
        for (pre, (s, sg)) in entries() {
            cols.push(name(pre, s, sg));
        }
        for (pre, (s, sg)) in entries() {
            cols.push(format!("int_{}", name(pre, s + 2.0, sg)));
        }
        cols
    }

    pub fn record(&mut self, state: &SimState) -> Result<()> {
        let grid = *state.u.grid();
        let plan = BlockPlan::standard(grid, true);
        let [u1, u2, u3] = state.u.components();
        let bh = plan.decompose(&[u1, u2], self.lam_h.p())?;
        let bv = plan.decompose(&[u3], self.lam_v.p())?;
        let mut norms = Vec::new();
        let mut smooth = Vec::new();
        for &(s, sg) in self.lam_h.entries() {
            norms.push(bh.weighted_sum(s, sg));
            smooth.push(bh.weighted_sum(s + 2.0, sg));
        }
        for &(s, sg) in self.lam_v.entries() {
            norms.push(bv.weighted_sum(s, sg));
            smooth.push(bv.weighted_sum(s + 2.0, sg));
        }
        self.smooth.push(smooth);
        let times: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.t)
            .chain(std::iter::once(state.t))
            .collect();
        let dissipation = (0..norms.len())
            .map(|c| {
                let vals: Vec<f64> = self.smooth.iter().map(|s| s[c]).collect();
                trapezoid(&times, &vals)
            })
            .collect();
        self.rows.push(DiagnosticRow {
            t: state.t,
            energy: state.u.energy(),
            max_velocity: state.u.max_velocity(),
            norms,
            dissipation,
        });
        Ok(())
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(self.column_names());
        for r in &self.rows {
            let mut row = vec![fmt_f64(r.t), fmt_f64(r.energy), fmt_f64(r.max_velocity)];
            row.extend(r.norms.iter().map(|v| fmt_f64(*v)));
            row.extend(r.dissipation.iter().map(|v| fmt_f64(*v)));
            t.push_row(row);
        }
        t
    }
}

/// Owns the state of one run and advances it.
#[derive(Clone, Debug)]
pub struct Simulation {
    cfg: SolverConfig,
    state: SimState,
}

impl Simulation {
    /// Starts from `P_N u0`, projected and dealiased.
    pub fn new(cfg: SolverConfig, u0: &VectorField) -> Result<Self> {
        cfg.validate()?;
        if !u0.grid().same_shape(&cfg.grid) {
            return Err(AnsError::GridMismatch(
                "initial data grid differs from solver grid".into(),
            ));
        }
        let mut u = u0.clone();
        frequency_cutoff_in_place(&mut u, cfg.cutoff);
        leray_project_in_place(&mut u);
        u.dealias();
        u.symmetrize_hermitian();
        Ok(Self {
            cfg,
            state: SimState::new(u),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    /// Steps until `t`, landing on it exactly; `on_step` sees every accepted state.
    pub fn advance_to(
        &mut self,
        t: f64,
        mut on_step: impl FnMut(&SimState) -> Result<()>,
    ) -> Result<()> {
        let eps = 1e-12 * t.abs().max(1.0);
        while self.state.t < t - eps {
            let mut dt = self.cfg.stable_dt(if self.cfg.adaptive {
                self.state.u.max_velocity()
            } else {
                0.0
            });
            let remaining = t - self.state.t;
            if dt >= remaining - eps {
                dt = remaining;
            }
            let mut next = step_with(&self.state, dt, self.cfg.cutoff)?;
            if (next.t - t).abs() <= eps {
                next.t = t;
            }
            self.state = next;
            on_step(&self.state)?;
        }
        Ok(())
    }

    /// Sample times: multiples of the cadence up to `t_end`, always ending at `t_end`.
    pub fn sample_times(&self) -> Vec<f64> {
        sample_times(self.cfg.t_end, self.cfg.sample_interval)
    }
}

pub fn sample_times(t_end: f64, interval: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    if t_end <= 0.0 {
        return times;
    }
    if interval > 0.0 {
        let count = (t_end / interval - 1e-9).floor() as usize;
        times.extend((1..=count).map(|i| i as f64 * interval));
    }
    times.push(t_end);
    times
}

/// Result of [`simulate`].
#[derive(Clone, Debug)]
pub struct SimOutput {
    pub diagnostics: Diagnostics,
    /// States at the sample times (only when requested).
    pub snapshots: Vec<SimState>,
    pub final_state: SimState,
}

/// Runs to `t_end`, recording diagnostics at the sample times (every step
/// when the cadence is zero).
pub fn simulate(cfg: &SolverConfig, u0: &VectorField, keep_snapshots: bool) -> Result<SimOutput> {
    simulate_with(cfg, u0, Diagnostics::standard(), keep_snapshots)
}

pub fn simulate_with(
    cfg: &SolverConfig,
    u0: &VectorField,
    mut diagnostics: Diagnostics,
    keep_snapshots: bool,
) -> Result<SimOutput> {
    let mut sim = Simulation::new(cfg.clone(), u0)?;
    let mut snapshots = Vec::new();
    diagnostics.record(sim.state())?;
    if keep_snapshots {
        snapshots.push(sim.state().clone());
    }
    let every_step = cfg.sample_interval == 0.0;
    for &t in sim.sample_times().iter().skip(1) {
        sim.advance_to(t, |s| {
            if every_step && s.t < t {
                diagnostics.record(s)?;
                if keep_snapshots {
                    snapshots.push(s.clone());
                }
            }
            Ok(())
        })?;
        diagnostics.record(sim.state())?;
        if keep_snapshots {
            snapshots.push(sim.state().clone());
        }
    }
    Ok(SimOutput {
        diagnostics,
        snapshots,
        final_state: sim.state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::leray_project;

    fn taylor_green(grid: Grid, amp: f64) -> VectorField {
        let u1 = SpectralField::from_fn(grid, |x, y, _| amp * x.sin() * y.cos());
        let u2 = SpectralField::from_fn(grid, |x, y, _| -amp * x.cos() * y.sin());
        VectorField::new(u1, u2, SpectralField::zeros(grid)).unwrap()
    }

    #[test]
    fn zero_field_has_zero_rhs() {
        let g = Grid::cube(8).unwrap();
        assert!(nonlinear_rhs(&VectorField::zeros(g), 4.0).unwrap().is_zero());
        assert!(nonlinear_rhs(&VectorField::zeros(g), 0.0).is_err());
    }

    #[test]
    fn taylor_green_nonlinearity_is_a_gradient() {
        // (u·∇)u = −∇(cos 2x + cos 2y)/4 for 2D Taylor–Green: projected term vanishes
        let g = Grid::new([16, 16, 4], [2.0 * std::f64::consts::PI; 3]).unwrap();
        let rhs = nonlinear_rhs(&taylor_green(g, 1.0), f64::INFINITY).unwrap();
        assert!(rhs.max_abs_coeff() < 1e-14);
    }

    #[test]
    fn rhs_is_quadratic_and_solenoidal() {
        let g = Grid::cube(16).unwrap();
        let mut rng = crate::random::trial_rng(3, 0);
        let u = crate::random::random_shell(g, &mut rng, 1.0, 3.0, 0.1);
        let a = nonlinear_rhs(&u, f64::INFINITY).unwrap();
        let b = nonlinear_rhs(&u.scaled(0.5), f64::INFINITY).unwrap();
        assert!(a.is_divergence_free(1e-12));
        assert!((a.l2_norm() / b.l2_norm() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn pressure_rejects_compressible_input() {
        let g = Grid::cube(8).unwrap();
        let u = VectorField::new(
            SpectralField::from_fn(g, |x, _, _| x.sin()),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        )
        .unwrap();
        assert!(matches!(pressure_decompose(&u), Err(AnsError::Precondition(_))));
        let z = pressure_decompose(&VectorField::zeros(g)).unwrap();
        assert!(z.total().is_zero());
    }

    #[test]
    fn planar_flow_has_no_vertical_pressure_part() {
        let g = Grid::cube(16).unwrap();
        let mut rng = crate::random::trial_rng(9, 0);
        let mut u = crate::random::random_shell(g, &mut rng, 1.0, 3.0, 0.2);
        // keep only the ξ3 = 0 plane of u_h and drop u3
        for i in 0..2 {
            for ((_, _, l), c) in u.component_mut(i).coeffs_mut().indexed_iter_mut() {
                if l != 0 {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
        *u.component_mut(2) = SpectralField::zeros(g);
        let u = leray_project(&u);
        let p = pressure_decompose(&u).unwrap();
        assert!(p.grad_p2[0].max_abs_coeff() < 1e-15);
        assert!(p.grad_p2[1].max_abs_coeff() < 1e-15);
        assert!(p.dp_dx3.max_abs_coeff() < 1e-15);
        assert!(p.grad_p1[0].max_abs_coeff() > 1e-6);
    }

    #[test]
    fn time_derivative_orders() {
        let g = Grid::cube(8).unwrap();
        let u = taylor_green(g, 1.0);
        assert_eq!(time_derivative(&u, 0, 4.0, 3).unwrap(), u);
        assert!(time_derivative(&u, 4, 4.0, 3).is_err());
        // Taylor–Green decays as e^{−2t}: ∂_t^n u = (−2)^n u
        let d = time_derivatives(&u, 3, f64::INFINITY).unwrap();
        for (n, dn) in d.iter().enumerate() {
            let expect = u.scaled((-2.0f64).powi(n as i32));
            assert!(dn.sub(&expect).max_abs_coeff() < 1e-12, "order {n}");
        }
    }

    #[test]
    fn sample_time_grid() {
        assert_eq!(sample_times(0.0, 0.5), vec![0.0]);
        assert_eq!(sample_times(1.0, 0.5), vec![0.0, 0.5, 1.0]);
        assert_eq!(sample_times(1.0, 0.3).len(), 5);
        assert_eq!(sample_times(1.0, 0.0), vec![0.0, 1.0]);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::cube(8).unwrap();
        let cfg = SolverConfig::new(g, 0.1, 0.5);
        let out = simulate(&cfg, &VectorField::zeros(g), false).unwrap();
        assert!(out.final_state.u.is_zero());
        assert!((out.final_state.t - 0.5).abs() < 1e-15);
    }
}
