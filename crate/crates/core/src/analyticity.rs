//! Space-time analyticity bookkeeping: the weighted derivative tableau, the
//! radius ODE `f′ = H(t, f) + V(t)`, vertical-radius fitting and the data
//! smallness condition.

use crate::besov::{analytic_series_data_norm, composite_data_norm, BesovIndex, LambdaSet, DEFAULT_SERIES_ORDER};
use crate::error::{AnsError, Result};
use crate::field::{SpectralField, VectorField};
use crate::io::{fmt_f64, CsvTable};
use crate::littlewood_paley::BlockPlan;
use crate::solver::{time_derivatives, SimState, Simulation, SolverConfig};
use crate::grid::Grid;
use crate::random::random_scalar;
use crate::spectral::{apply_derivative, leray_project};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticityParams {
    /// Initial vertical radius.
    pub rho0: f64,
    /// Damping weight in `e^{−λ β3 f}`.
    pub lambda: f64,
    /// Radius of the time/horizontal derivative series, `0 < r ≤ 1`.
    pub r: f64,
    pub p: f64,
    pub theta: f64,
    /// Largest time-derivative order `M`.
    pub max_time_order: usize,
    /// Largest derivative order per spatial axis `B`.
    pub max_space_order: usize,
}

impl AnalyticityParams {
    pub fn new(
        rho0: f64,
        lambda: f64,
        r: f64,
        p: f64,
        theta: f64,
        max_time_order: usize,
        max_space_order: usize,
    ) -> Result<Self> {
        let out = Self {
            rho0,
            lambda,
            r,
            p,
            theta,
            max_time_order,
            max_space_order,
        };
        out.validate()?;
        Ok(out)
    }

    /// `λ = 10 C0*`, `r = 1/(10 C0*)`.
    pub fn from_constants(
        constants: &MeasuredConstants,
        rho0: f64,
        p: f64,
        theta: f64,
        max_time_order: usize,
        max_space_order: usize,
    ) -> Result<Self> {
        Self::new(
            rho0,
            constants.lambda(),
            constants.r(),
            p,
            theta,
            max_time_order,
            max_space_order,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0) {
            return Err(AnsError::Domain(format!("rho0 must be > 0, got {}", self.rho0)));
        }
        if !(self.lambda > 0.0) {
            return Err(AnsError::Domain(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(AnsError::Domain(format!("r must lie in (0, 1], got {}", self.r)));
        }
        crate::besov::validate_p_theta(self.p, self.theta)
    }

    /// `(2/p + 1, 1/p)` for the horizontal ODE sum.
    pub fn ode_horizontal_index(&self) -> BesovIndex {
        BesovIndex {
            s: 2.0 / self.p + 1.0,
            sigma: 1.0 / self.p,
            p: self.p,
            homogeneous: true,
        }
    }

    /// `(2/p, 1/p)` for the vertical ODE sum.
    pub fn ode_vertical_index(&self) -> BesovIndex {
        BesovIndex {
            s: 2.0 / self.p,
            sigma: 1.0 / self.p,
            p: self.p,
            homogeneous: true,
        }
    }

    pub fn lambda_h(&self) -> Result<LambdaSet> {
        LambdaSet::horizontal(self.p, self.theta)
    }

    pub fn lambda_v(&self) -> Result<LambdaSet> {
        LambdaSet::vertical(self.p, self.theta)
    }
}

/// Empirical stand-ins for the unquantified constants: `C*` from the cutoff
/// kernel and `C0` from the linear and bilinear estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasuredConstants {
    pub cutoff_l1: f64,
    pub c0: f64,
}

impl MeasuredConstants {
    pub fn c0_star(&self) -> f64 {
        self.cutoff_l1 * self.c0
    }

    pub fn lambda(&self) -> f64 {
        10.0 * self.c0_star()
    }

    pub fn r(&self) -> f64 {
        1.0 / (10.0 * self.c0_star())
    }

    /// `(η, C)` such that `‖u0h‖ ≤ η e^{−C‖u03‖}` implies both data
    /// conditions of the global construction.
    pub fn smallness_constants(&self, theta: f64) -> (f64, f64) {
        let c = self.c0_star();
        let lambda = self.lambda();
        let ln2 = std::f64::consts::LN_2;
        let eta1 = (ln2 / (2.0 * lambda * c)).powf(1.0 / theta) / (3.0 * c);
        let exp1 = (2.0 * c + 4.0 * theta * c * c) / theta;
        let eta2 = ln2 / (6.0 * lambda * c * c);
        let exp2 = 4.0 * c * c;
        (eta1.min(eta2), exp1.max(exp2))
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut out = vec![1.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] * i as f64;
    }
    out
}

/// Weighted tableau sums at one time. The horizontal sum is stored per `β3`
/// so that `H(f) = Σ_{β3} h_{β3} e^{−λ β3 f}` costs nothing to re-evaluate.
#[derive(Clone, Debug, PartialEq)]
pub struct Tableau {
    pub t: f64,
    lambda: f64,
    orders: (usize, usize),
    /// `Σ_{α, β_h} w · ‖∂_t^α ∂^β u_h‖` for each `β3`.
    pub h_by_beta3: Vec<f64>,
    /// Same, restricted to the last shell (`α = M` or some `β_i = B`).
    pub h_last_by_beta3: Vec<f64>,
    pub v_sum: f64,
    pub v_last: f64,
    /// Weighted horizontal terms indexed `[α][β1][β2][β3]`.
    pub terms_h: Vec<f64>,
    /// Weighted vertical terms indexed `[α][β1][β2]`.
    pub terms_v: Vec<f64>,
}

impl Tableau {
    fn weight(&self, beta3: usize, f: f64) -> f64 {
        if beta3 == 0 {
            1.0
        } else {
            (-self.lambda * beta3 as f64 * f).exp()
        }
    }

    /// `H(t, f)`.
    pub fn horizontal(&self, f: f64) -> f64 {
        self.h_by_beta3
            .iter()
            .enumerate()
            .map(|(b3, h)| h * self.weight(b3, f))
            .sum()
    }

    pub fn horizontal_last_shell(&self, f: f64) -> f64 {
        self.h_last_by_beta3
            .iter()
            .enumerate()
            .map(|(b3, h)| h * self.weight(b3, f))
            .sum()
    }

    pub fn vertical(&self) -> f64 {
        self.v_sum
    }

    /// Right-hand side of the radius ODE.
    pub fn rhs(&self, f: f64) -> f64 {
        self.horizontal(f) + self.v_sum
    }

    pub fn orders(&self) -> (usize, usize) {
        self.orders
    }

    pub fn term_h(&self, alpha: usize, beta: [usize; 3]) -> f64 {
        let b = self.orders.1 + 1;
        self.terms_h[((alpha * b + beta[0]) * b + beta[1]) * b + beta[2]]
    }

    pub fn term_v(&self, alpha: usize, beta_h: [usize; 2]) -> f64 {
        let b = self.orders.1 + 1;
        self.terms_v[(alpha * b + beta_h[0]) * b + beta_h[1]]
    }
}

/// Weight `r^{α+|β_h|} t^{α+|β_h|/2} / (α! β_h!)` with `0⁰ = 1`.
fn time_weight(r: f64, t: f64, alpha: usize, b1: usize, b2: usize, fact: &[f64]) -> f64 {
    let bh = (b1 + b2) as f64;
    let texp = alpha as f64 + 0.5 * bh;
    let tpow = if texp == 0.0 { 1.0 } else { t.powf(texp) };
    r.powf(alpha as f64 + bh) * tpow / (fact[alpha] * fact[b1] * fact[b2])
}

/// Block energies `Σ φ_h² φ_v² ξ1^{2β1} ξ2^{2β2} ξ3^{2β3} |c|²` for all
/// `β_i ≤ B` (`β3 = 0` only when `vertical_orders` is false), indexed
/// `[β1][β2][β3][k][j]`.
fn derivative_block_energies(
    plan: &BlockPlan,
    components: &[&SpectralField],
    b: usize,
    vertical_orders: bool,
) -> Vec<f64> {
    let grid = *plan.grid();
    let (n0, n1, n2) = grid.shape();
    let range = plan.range();
    let (nk, nj) = (range.k_len(), range.j_len());
    let nb3 = if vertical_orders { b + 1 } else { 1 };
    let blocks = nk * nj;
    let mut out = vec![0.0; (b + 1) * (b + 1) * nb3 * blocks];
    let powers = |axis: usize, count: usize| -> Vec<Vec<f64>> {
        grid.wavenumbers(axis)
            .iter()
            .map(|x| (0..count).map(|e| (x * x).powi(e as i32)).collect())
            .collect()
    };
    let p0 = powers(0, b + 1);
    let p1 = powers(1, b + 1);
    let p2 = powers(2, nb3);
    let data: Vec<&[num_complex::Complex64]> = components.iter().map(|c| c.data()).collect();
    // per horizontal mode: Σ_{i3} φ_v² ξ3^{2β3}|c|², indexed [j][β3]
    let mut inner = vec![0.0; nj * nb3];
    for a in 0..n0 {
        for c in 0..n1 {
            let hw = plan.horizontal_weights(a, c);
            if hw.is_empty() {
                continue;
            }
            inner.iter_mut().for_each(|v| *v = 0.0);
            let mut any = false;
            for l in 0..n2 {
                let vw = plan.vertical_weights(l);
                if vw.is_empty() {
                    continue;
                }
                let idx = (a * n1 + c) * n2 + l;
                let mag: f64 = data.iter().map(|d| d[idx].norm_sqr()).sum();
                if mag == 0.0 {
                    continue;
                }
                any = true;
                for (j, wv) in vw.iter() {
                    if j < range.j_min || j > range.j_max {
                        continue;
                    }
                    let js = (j - range.j_min) as usize;
                    let base = wv * wv * mag;
                    for b3 in 0..nb3 {
                        inner[js * nb3 + b3] += base * p2[l][b3];
                    }
                }
            }
            if !any {
                continue;
            }
            for (k, wh) in hw.iter() {
                if k < range.k_min || k > range.k_max {
                    continue;
                }
                let ks = (k - range.k_min) as usize;
                let wh2 = wh * wh;
                for b1 in 0..=b {
                    for b2 in 0..=b {
                        let hfac = wh2 * p0[a][b1] * p1[c][b2];
                        if hfac == 0.0 {
                            continue;
                        }
                        for b3 in 0..nb3 {
                            let slot = ((b1 * (b + 1) + b2) * nb3 + b3) * blocks + ks * nj;
                            for js in 0..nj {
                                out[slot + js] += hfac * inner[js * nb3 + b3];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Sum over `indices` of `Σ_{k,j} 2^{sk+σj} (vol·E_{k,j})^{1/2}`.
fn norms_from_energies(energies: &[f64], plan: &BlockPlan, indices: &[BesovIndex]) -> f64 {
    let range = plan.range();
    let vol = plan.grid().volume();
    let nj = range.j_len();
    let mut total = 0.0;
    for idx in indices {
        for (slot, e) in energies.iter().enumerate() {
            if *e == 0.0 {
                continue;
            }
            let k = range.k_min + (slot / nj) as i32;
            let j = range.j_min + (slot % nj) as i32;
            total += (idx.s * k as f64 + idx.sigma * j as f64).exp2() * (vol * e).sqrt();
        }
    }
    total
}

fn fast_path_applies(indices: &[BesovIndex]) -> bool {
    indices.iter().all(|i| i.p == 2.0 && i.homogeneous)
}

/// Tableau from precomputed time derivatives `∂_t^α u`, `α = 0..=M`.
pub fn tableau_from_derivatives(
    derivatives: &[VectorField],
    t: f64,
    params: &AnalyticityParams,
    h_indices: &[BesovIndex],
    v_indices: &[BesovIndex],
) -> Result<Tableau> {
    let m = params.max_time_order;
    let b = params.max_space_order;
    if derivatives.len() < m + 1 {
        return Err(AnsError::Domain(format!(
            "tableau needs {} time derivatives, got {}",
            m + 1,
            derivatives.len()
        )));
    }
    if !(t >= 0.0) {
        return Err(AnsError::Domain(format!("tableau time must be >= 0, got {t}")));
    }
    let fact = factorials(m.max(b));
    let grid = *derivatives[0].grid();
    let nb = b + 1;
    let mut terms_h = vec![0.0; (m + 1) * nb * nb * nb];
    let mut terms_v = vec![0.0; (m + 1) * nb * nb];
    let fast = fast_path_applies(h_indices) && fast_path_applies(v_indices);
    let plan = BlockPlan::standard(grid, true);
    for (alpha, d) in derivatives.iter().take(m + 1).enumerate() {
        let [u1, u2, u3] = d.components();
        if fast {
            let eh = derivative_block_energies(&plan, &[u1, u2], b, true);
            let ev = derivative_block_energies(&plan, &[u3], b, false);
            let blocks = plan.range().k_len() * plan.range().j_len();
            for b1 in 0..nb {
                for b2 in 0..nb {
                    let tw = time_weight(params.r, t, alpha, b1, b2, &fact);
                    for b3 in 0..nb {
                        let slot = ((b1 * nb + b2) * nb + b3) * blocks;
                        let norm = norms_from_energies(&eh[slot..slot + blocks], &plan, h_indices);
                        let w = tw * params.rho0.powi(b3 as i32) / fact[b3];
                        terms_h[((alpha * nb + b1) * nb + b2) * nb + b3] = w * norm;
                    }
                    let slot = (b1 * nb + b2) * blocks;
                    let norm = norms_from_energies(&ev[slot..slot + blocks], &plan, v_indices);
                    terms_v[(alpha * nb + b1) * nb + b2] = tw * norm;
                }
            }
        } else {
            for b1 in 0..nb {
                for b2 in 0..nb {
                    let tw = time_weight(params.r, t, alpha, b1, b2, &fact);
                    for b3 in 0..nb {
                        let beta = [b1 as u32, b2 as u32, b3 as u32];
                        let d1 = apply_derivative(u1, beta);
                        let d2 = apply_derivative(u2, beta);
                        let norm = generic_norm(&[&d1, &d2], h_indices)?;
                        let w = tw * params.rho0.powi(b3 as i32) / fact[b3];
                        terms_h[((alpha * nb + b1) * nb + b2) * nb + b3] = w * norm;
                    }
                    let d3 = apply_derivative(u3, [b1 as u32, b2 as u32, 0]);
                    terms_v[(alpha * nb + b1) * nb + b2] = tw * generic_norm(&[&d3], v_indices)?;
                }
            }
        }
    }
    assemble(t, params, terms_h, terms_v)
}

fn generic_norm(components: &[&SpectralField], indices: &[BesovIndex]) -> Result<f64> {
    let mut total = 0.0;
    for idx in indices {
        total += crate::besov::besov_norm_vector(components, idx)?;
    }
    Ok(total)
}

fn assemble(t: f64, params: &AnalyticityParams, terms_h: Vec<f64>, terms_v: Vec<f64>) -> Result<Tableau> {
    let m = params.max_time_order;
    let b = params.max_space_order;
    let nb = b + 1;
    let mut h = vec![0.0; nb];
    let mut h_last = vec![0.0; nb];
    let mut v_sum = 0.0;
    let mut v_last = 0.0;
    for alpha in 0..=m {
        for b1 in 0..nb {
            for b2 in 0..nb {
                for b3 in 0..nb {
                    let term = terms_h[((alpha * nb + b1) * nb + b2) * nb + b3];
                    h[b3] += term;
                    if alpha == m || b1 == b || b2 == b || b3 == b {
                        h_last[b3] += term;
                    }
                }
                let term = terms_v[(alpha * nb + b1) * nb + b2];
                v_sum += term;
                if alpha == m || b1 == b || b2 == b {
                    v_last += term;
                }
            }
        }
    }
    if h.iter().any(|v| !v.is_finite()) || !v_sum.is_finite() {
        return Err(AnsError::Overflow(format!(
            "tableau sum is not finite at t = {t}"
        )));
    }
    Ok(Tableau {
        t,
        lambda: params.lambda,
        orders: (m, b),
        h_by_beta3: h,
        h_last_by_beta3: h_last,
        v_sum,
        v_last,
        terms_h,
        terms_v,
    })
}

/// Tableau of the flow state `u` at time `t` (time derivatives through the
/// equation with cutoff `cutoff`).
pub fn tableau(
    u: &VectorField,
    t: f64,
    cutoff: f64,
    params: &AnalyticityParams,
    h_indices: &[BesovIndex],
    v_indices: &[BesovIndex],
) -> Result<Tableau> {
    let derivs = time_derivatives(u, params.max_time_order, cutoff)?;
    tableau_from_derivatives(&derivs, t, params, h_indices, v_indices)
}

/// `(H, V)` for one index, with the horizontal terms damped at `f_val`.
pub fn tableau_norms(
    u: &VectorField,
    t: f64,
    cutoff: f64,
    params: &AnalyticityParams,
    f_val: f64,
    idx: &BesovIndex,
) -> Result<(f64, f64)> {
    if !(f_val >= 0.0) {
        return Err(AnsError::Domain(format!("f must be >= 0, got {f_val}")));
    }
    let tab = tableau(u, t, cutoff, params, &[*idx], &[*idx])?;
    Ok((tab.horizontal(f_val), tab.vertical()))
}

/// Tableau with the radius-ODE indices.
pub fn ode_tableau(u: &VectorField, t: f64, cutoff: f64, params: &AnalyticityParams) -> Result<Tableau> {
    tableau(
        u,
        t,
        cutoff,
        params,
        &[params.ode_horizontal_index()],
        &[params.ode_vertical_index()],
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusState {
    pub t: f64,
    pub f: f64,
    pub last_rhs: f64,
}

impl RadiusState {
    pub fn initial() -> Self {
        Self {
            t: 0.0,
            f: 0.0,
            last_rhs: 0.0,
        }
    }
}

pub fn radius_ode_rhs(state: &RadiusState, tableau: &Tableau) -> f64 {
    tableau.rhs(state.f)
}

/// One classical RK4 step of the radius ODE given tableaux at the start,
/// midpoint and end of the step.
pub fn radius_rk4_step(state: &RadiusState, h: f64, start: &Tableau, mid: &Tableau, end: &Tableau) -> RadiusState {
    let f = state.f;
    let k1 = start.rhs(f);
    let k2 = mid.rhs(f + 0.5 * h * k1);
    let k3 = mid.rhs(f + 0.5 * h * k2);
    let k4 = end.rhs(f + h * k3);
    let next = f + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    RadiusState {
        t: state.t + h,
        f: next,
        last_rhs: end.rhs(next),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusSample {
    pub t: f64,
    pub f: f64,
    pub rho: f64,
    pub tableau_h: f64,
    pub tableau_v: f64,
    pub last_shell_h: f64,
    pub last_shell_v: f64,
}

impl RadiusSample {
    fn from(tab: &Tableau, f: f64, params: &AnalyticityParams) -> Self {
        Self {
            t: tab.t,
            f,
            rho: params.rho0 * (-params.lambda * f).exp(),
            tableau_h: tab.horizontal(f),
            tableau_v: tab.vertical(),
            last_shell_h: tab.horizontal_last_shell(f),
            last_shell_v: tab.v_last,
        }
    }

    /// Largest last-shell fraction of the two sums.
    pub fn truncation_ratio(&self) -> f64 {
        let frac = |last: f64, total: f64| if total > 0.0 { last / total } else { 0.0 };
        frac(self.last_shell_h, self.tableau_h).max(frac(self.last_shell_v, self.tableau_v))
    }
}

#[derive(Clone, Debug)]
pub struct RadiusRun {
    pub samples: Vec<RadiusSample>,
    pub final_state: SimState,
    pub params: AnalyticityParams,
}

impl RadiusRun {
    /// `ρ(t) ≥ ρ0/2` at every sample.
    pub fn radius_stays_above_half(&self) -> bool {
        self.samples.iter().all(|s| s.rho >= 0.5 * self.params.rho0)
    }

    pub fn f_non_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].f >= w[0].f)
    }

    pub fn max_truncation_ratio(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.truncation_ratio())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new([
            "t",
            "f",
            "rho",
            "tableau_H",
            "tableau_V",
            "last_shell_H",
            "last_shell_V",
        ]);
        for s in &self.samples {
            t.push_row(
                [s.t, s.f, s.rho, s.tableau_h, s.tableau_v, s.last_shell_h, s.last_shell_v]
                    .iter()
                    .map(|v| fmt_f64(*v))
                    .collect(),
            );
        }
        t
    }
}

/// Integrates the radius ODE with RK4 steps of `ode_dt` alongside the flow;
/// the flow is advanced to every half step to supply midpoint tableaux.
pub fn evolve_radius(
    cfg: &SolverConfig,
    u0: &VectorField,
    params: &AnalyticityParams,
    ode_dt: f64,
) -> Result<RadiusRun> {
    params.validate()?;
    if !(ode_dt > 0.0) {
        return Err(AnsError::Domain(format!("ode_dt must be > 0, got {ode_dt}")));
    }
    let mut sim = Simulation::new(cfg.clone(), u0)?;
    let t_end = cfg.t_end;
    let mut state = RadiusState::initial();
    let mut start = ode_tableau(&sim.state().u, 0.0, cfg.cutoff, params)?;
    state.last_rhs = start.rhs(0.0);
    let mut samples = vec![RadiusSample::from(&start, 0.0, params)];
    let steps = if t_end > 0.0 {
        (t_end / ode_dt - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };
    for n in 0..steps {
        let t0 = n as f64 * ode_dt;
        let t1 = if n + 1 == steps { t_end } else { (n + 1) as f64 * ode_dt };
        let h = t1 - t0;
        sim.advance_to(t0 + 0.5 * h, |_| Ok(()))?;
        let mid = ode_tableau(&sim.state().u, sim.state().t, cfg.cutoff, params)?;
        sim.advance_to(t1, |_| Ok(()))?;
        let end = ode_tableau(&sim.state().u, sim.state().t, cfg.cutoff, params)?;
        state = radius_rk4_step(&state, h, &start, &mid, &end);
        state.t = t1;
        samples.push(RadiusSample::from(&end, state.f, params));
        start = end;
    }
    Ok(RadiusRun {
        samples,
        final_state: sim.state().clone(),
        params: *params,
    })
}

/// Decay rate `ρ` of the vertical spectrum: least-squares slope of
/// `½ log E(|ξ3|)` against `|ξ3|` over the shells `ξ3 ≠ 0` with `E > 1e-24`.
pub fn fit_vertical_radius(u: &VectorField) -> Result<f64> {
    let grid = *u.grid();
    let n3 = grid.n()[2];
    let mut shells = vec![0.0; n3 / 2 + 1];
    for c in u.components() {
        for ((_, _, l), v) in c.coeffs().indexed_iter() {
            let m = grid.mode(2, l).unsigned_abs() as usize;
            shells[m] += v.norm_sqr();
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let points: Vec<(f64, f64)> = shells
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, e)| **e > 1e-24)
        .map(|(m, e)| (two_pi * m as f64 / grid.lengths()[2], 0.5 * e.ln()))
        .collect();
    if points.len() < 3 {
        return Err(AnsError::InsufficientSpectralRange(format!(
            "{} vertical shells above threshold, need 3",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((-sxy / sxx).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmallnessReport {
    /// Truncated vertical series of `u_{0,h}` in the horizontal data norm.
    pub lhs: f64,
    /// `η e^{−C‖u_{0,3}‖}`.
    pub rhs: f64,
    pub pass: bool,
    pub vertical_norm: f64,
    pub series_last_term: f64,
}

pub fn smallness_check(u0: &VectorField, params: &AnalyticityParams, eta: f64, c: f64) -> Result<SmallnessReport> {
    let lam_h = params.lambda_h()?;
    let lam_v = params.lambda_v()?;
    let [u1, u2, u3] = u0.components();
    let series = analytic_series_data_norm([u1, u2], params.rho0, DEFAULT_SERIES_ORDER, &lam_h)?;
    let (_, vertical_norm) = composite_data_norm([u1, u2], u3, &lam_h, &lam_v)?;
    let rhs = eta * (-c * vertical_norm).exp();
    Ok(SmallnessReport {
        lhs: series.total,
        rhs,
        pass: series.total <= rhs,
        vertical_norm,
        series_last_term: series.last_term(),
    })
}

/// Which part of the data the amplitude multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmplitudeScaling {
    HorizontalOnly,
    Whole,
}

/// Largest amplitude `A` with `A·u0` (or `(A·u0h, u03)`) passing the
/// smallness condition, by bisection to relative tolerance `tol`.
pub fn crossing_amplitude(
    u0: &VectorField,
    params: &AnalyticityParams,
    eta: f64,
    c: f64,
    scaling: AmplitudeScaling,
    tol: f64,
) -> Result<f64> {
    let unit = smallness_check(u0, params, eta, c)?;
    if unit.lhs == 0.0 {
        return Err(AnsError::Domain(
            "horizontal data vanish: every amplitude passes".into(),
        ));
    }
    // both sides are exactly homogeneous in the amplitude
    let gap = |a: f64| -> f64 {
        let v = match scaling {
            AmplitudeScaling::HorizontalOnly => unit.vertical_norm,
            AmplitudeScaling::Whole => a * unit.vertical_norm,
        };
        a * unit.lhs - eta * (-c * v).exp()
    };
    let mut lo = 0.0;
    let mut hi = eta / unit.lhs;
    while gap(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if gap(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Divergence-free field whose modes have Euclidean magnitude
/// `amp·e^{−ρ|ξ3|}` on `ξ3 ≠ 0`, `0 < |ξ_h| ≤ horizontal_max`, with random
/// directions and phases.
pub fn analytic_vertical_data(
    grid: Grid,
    rng: &mut impl rand::Rng,
    rho: f64,
    amp: f64,
    horizontal_max: f64,
) -> Result<VectorField> {
    if !(rho >= 0.0) || !amp.is_finite() || !(horizontal_max > 0.0) {
        return Err(AnsError::Domain(format!(
            "analytic-vertical needs rho >= 0, finite amp, positive horizontal cutoff; got {rho}, {amp}, {horizontal_max}"
        )));
    }
    let keep = |xi: [f64; 3]| {
        let h = xi[0].hypot(xi[1]);
        xi[2] != 0.0 && h > 0.0 && h <= horizontal_max
    };
    let raw = VectorField::new(
        random_scalar(grid, rng, keep),
        random_scalar(grid, rng, keep),
        random_scalar(grid, rng, keep),
    )?;
    let mut u = leray_project(&raw);
    let (n0, n1, n2) = grid.shape();
    let kz = grid.wavenumbers(2);
    let [c1, c2, c3] = u.components_mut();
    let (d1, d2, d3) = (c1.data_mut(), c2.data_mut(), c3.data_mut());
    for a in 0..n0 {
        for b in 0..n1 {
            for c in 0..n2 {
                let i = (a * n1 + b) * n2 + c;
                let mag = (d1[i].norm_sqr() + d2[i].norm_sqr() + d3[i].norm_sqr()).sqrt();
                if mag == 0.0 {
                    continue;
                }
                let s = amp * (-rho * kz[c].abs()).exp() / mag;
                d1[i] *= s;
                d2[i] *= s;
                d3[i] *= s;
            }
        }
    }
    Ok(u)
}
