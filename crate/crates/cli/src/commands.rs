use std::path::{Path, PathBuf};

use ans_core::analyticity::{
    crossing_amplitude, evolve_radius, smallness_check, AmplitudeScaling, AnalyticityParams, MeasuredConstants,
    RadiusRun, SmallnessReport,
};
use ans_core::besov::{besov_norm_vector, contribution_table, BesovIndex};
use ans_core::io::{fmt_f64, read_field, write_atomic, write_vector, CsvTable, FieldData};
use ans_core::solver::{Diagnostics, SimState, Simulation, SolverConfig};
use ans_core::spectral::cutoff_kernel_l1;
use ans_core::verifier::{
    run_estimate, EnsembleSpec, Estimate, HeatEnsemble, Multiplier, ProductExponents,
};
use ans_core::{Grid, VectorField};

use crate::config::Config;
use crate::data::DataSpec;
use crate::{CliError, Command, Common};

/// Files written by one run, listed in its manifest.
pub struct Output {
    dir: PathBuf,
    command: &'static str,
    files: Vec<(String, usize)>,
}

impl Output {
    pub fn new(dir: PathBuf, command: &'static str) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            command,
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        write_atomic(&path, bytes)?;
        self.files.push((name.to_string(), bytes.len()));
        Ok(path)
    }

    pub fn csv(&mut self, name: &str, table: &CsvTable) -> Result<PathBuf, CliError> {
        self.write(name, table.render().as_bytes())
    }

    pub fn field(&mut self, name: &str, u: &VectorField) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        write_vector(&path, u)?;
        let bytes = std::fs::metadata(&path).map(|m| m.len() as usize).unwrap_or(0);
        self.files.push((name.to_string(), bytes));
        Ok(path)
    }

    /// Config echo and manifest.
    pub fn finish(mut self, cfg: &Config) -> Result<(), CliError> {
        let echo = format!("{}_config.toml", self.command);
        self.write(&echo, cfg.render().as_bytes())?;
        let mut table = CsvTable::new(["file", "bytes"]);
        for (name, bytes) in &self.files {
            table.push_row(vec![name.clone(), bytes.to_string()]);
        }
        let name = format!("{}_manifest.csv", self.command);
        write_atomic(&self.path(&name), table.render().as_bytes())?;
        Ok(())
    }
}

fn resolve(common: &Common, overrides: &[(&str, &Option<String>)]) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for assignment in &common.set {
        cfg.set_assignment(assignment)?;
    }
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    let dir = if let Some(d) = &common.out_dir {
        d.clone()
    } else if !cfg.string("output", "dir").is_empty() {
        PathBuf::from(cfg.string("output", "dir"))
    } else if let Some(d) = std::env::var_os("ANS_OUTPUT_DIR") {
        PathBuf::from(d)
    } else {
        PathBuf::from("ans-output")
    };
    cfg.set("output.dir", &dir.to_string_lossy())?;
    Ok(cfg)
}

fn output(cfg: &Config, command: &'static str) -> Result<Output, CliError> {
    Output::new(PathBuf::from(cfg.string("output", "dir")), command)
}

fn usize_list<const N: usize>(cfg: &Config, section: &str, key: &str) -> Result<[usize; N], CliError> {
    let v = cfg.ints(section, key);
    let mut out = [0usize; N];
    for (o, x) in out.iter_mut().zip(v) {
        *o = usize::try_from(*x).map_err(|_| CliError::Validation(format!("{section}.{key}: {x} must be >= 0")))?;
    }
    Ok(out)
}

pub fn grid_from(cfg: &Config) -> Result<Grid, CliError> {
    let n = usize_list::<3>(cfg, "grid", "n")?;
    let l = cfg.floats("grid", "lengths");
    Ok(Grid::with_dealias(n, [l[0], l[1], l[2]], cfg.float("grid", "dealias"))?)
}

fn seed_from(cfg: &Config, section: &str) -> Result<u64, CliError> {
    u64::try_from(cfg.int(section, "seed"))
        .map_err(|_| CliError::Validation(format!("{section}.seed must be >= 0")))
}

pub fn solver_config(cfg: &Config, grid: Grid) -> Result<SolverConfig, CliError> {
    let mut sc = SolverConfig::new(grid, cfg.float("solver", "dt"), cfg.float("solver", "t_end"));
    sc.cfl_safety = cfg.float("solver", "cfl");
    sc.adaptive = cfg.boolean("solver", "adaptive");
    sc.sample_interval = cfg.float("solver", "sample_interval");
    sc.cutoff = cfg.float("solver", "cutoff");
    sc.max_time_order = usize::try_from(cfg.int("solver", "max_time_order"))
        .map_err(|_| CliError::Validation("solver.max_time_order must be >= 0".into()))?;
    sc.validate()?;
    Ok(sc)
}

fn read_vector(path: &Path) -> Result<VectorField, CliError> {
    match read_field(path)? {
        FieldData::Vector(u) => Ok(u),
        FieldData::Scalar(_) => Err(CliError::Validation(format!(
            "{} holds a scalar field, expected a velocity",
            path.display()
        ))),
    }
}

/// Initial data: the field file when set, the data spec otherwise.
pub fn initial_data(cfg: &Config) -> Result<VectorField, CliError> {
    let file = cfg.string("data", "field");
    if !file.is_empty() {
        return read_vector(Path::new(file));
    }
    let grid = grid_from(cfg)?;
    DataSpec::parse(cfg.string("data", "spec"))?.build(grid, seed_from(cfg, "data")?)
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            common,
            field,
            data,
            dt,
            t_end,
        } => {
            let cfg = resolve(
                &common,
                &[
                    ("data.field", &field),
                    ("data.spec", &data),
                    ("solver.dt", &dt),
                    ("solver.t_end", &t_end),
                ],
            )?;
            simulate(&cfg)
        }
        Command::Radius { common, field, data } => {
            let cfg = resolve(&common, &[("data.field", &field), ("data.spec", &data)])?;
            radius(&cfg)
        }
        Command::Norms {
            common,
            field,
            s,
            sigma,
            p,
            inhomogeneous,
        } => {
            let mut cfg = resolve(
                &common,
                &[
                    ("norms.field", &field),
                    ("norms.s", &s),
                    ("norms.sigma", &sigma),
                    ("norms.p", &p),
                ],
            )?;
            if inhomogeneous {
                cfg.set("norms.homogeneous", "false")?;
            }
            norms(&cfg)
        }
        Command::Verify {
            common,
            lemma,
            trials,
            seed,
            resolution,
        } => {
            let cfg = resolve(
                &common,
                &[
                    ("verify.lemma", &lemma),
                    ("verify.trials", &trials),
                    ("verify.seed", &seed),
                    ("verify.resolution", &resolution),
                ],
            )?;
            verify(&cfg)
        }
        Command::MakeData {
            common,
            spec,
            seed,
            n,
            lengths,
            out,
        } => {
            let cfg = resolve(
                &common,
                &[
                    ("data.spec", &spec),
                    ("data.seed", &seed),
                    ("grid.n", &n),
                    ("grid.lengths", &lengths),
                    ("data.out", &out),
                ],
            )?;
            make_data(&cfg)
        }
    }
}

pub fn simulate(cfg: &Config) -> Result<(), CliError> {
    let u0 = initial_data(cfg)?;
    let sc = solver_config(cfg, *u0.grid())?;
    let mut out = output(cfg, "simulate")?;
    let snapshots = cfg.boolean("output", "snapshots");
    let mut diagnostics = Diagnostics::standard();
    let mut sim = Simulation::new(sc.clone(), &u0)?;
    let mut snap_count = 0usize;
    let mut record = |s: &SimState, diagnostics: &mut Diagnostics, out: &mut Output| -> Result<(), CliError> {
        diagnostics.record(s)?;
        if snapshots {
            out.field(&format!("snapshot_{snap_count:05}.ansf"), &s.u)?;
            snap_count += 1;
        }
        Ok(())
    };
    record(sim.state(), &mut diagnostics, &mut out)?;
    let every_step = sc.sample_interval == 0.0;
    let mut failure = None;
    for &t in sim.sample_times().iter().skip(1) {
        let mut pending = Vec::new();
        let res = sim.advance_to(t, |s| {
            if every_step && s.t < t {
                pending.push(s.clone());
            }
            Ok(())
        });
        for s in &pending {
            record(s, &mut diagnostics, &mut out)?;
        }
        if let Err(e) = res {
            failure = Some(e);
            break;
        }
        record(sim.state(), &mut diagnostics, &mut out)?;
    }
    out.csv("diagnostics.csv", &diagnostics.to_csv())?;
    out.field("final.ansf", &sim.state().u)?;
    out.finish(cfg)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// Everything the radius command computes.
pub struct RadiusOutcome {
    pub constants: MeasuredConstants,
    pub params: AnalyticityParams,
    pub eta: f64,
    pub growth: f64,
    /// Amplitude factor applied to the data (1 when not rescaled).
    pub amplitude: f64,
    pub smallness: SmallnessReport,
    pub run: RadiusRun,
}

impl RadiusOutcome {
    pub fn summary(&self) -> String {
        let last = self.run.samples.last().expect("at least the initial sample");
        let min_rho = self.run.samples.iter().map(|s| s.rho).fold(f64::INFINITY, f64::min);
        let lines = [
            ("cutoff_l1", fmt_f64(self.constants.cutoff_l1)),
            ("c0", fmt_f64(self.constants.c0)),
            ("c0_star", fmt_f64(self.constants.c0_star())),
            ("lambda", fmt_f64(self.params.lambda)),
            ("r", fmt_f64(self.params.r)),
            ("rho0", fmt_f64(self.params.rho0)),
            ("eta", fmt_f64(self.eta)),
            ("growth", fmt_f64(self.growth)),
            ("amplitude", fmt_f64(self.amplitude)),
            ("smallness_lhs", fmt_f64(self.smallness.lhs)),
            ("smallness_rhs", fmt_f64(self.smallness.rhs)),
            ("smallness_pass", self.smallness.pass.to_string()),
            ("t_end", fmt_f64(last.t)),
            ("f_end", fmt_f64(last.f)),
            ("rho_end", fmt_f64(last.rho)),
            ("rho_min", fmt_f64(min_rho)),
            ("rho_above_half", self.run.radius_stays_above_half().to_string()),
            ("f_non_decreasing", self.run.f_non_decreasing().to_string()),
            ("max_truncation_ratio", fmt_f64(self.run.max_truncation_ratio())),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Resolves the constants (measuring the unset ones), optionally rescales
/// the data to a fraction of the crossing amplitude, and runs the coupled
/// flow/radius integration.
pub fn radius_outcome(cfg: &Config) -> Result<RadiusOutcome, CliError> {
    let mut u0 = initial_data(cfg)?;
    let grid = *u0.grid();
    let sc = solver_config(cfg, grid)?;
    let p = cfg.float("analyticity", "p");
    let theta = cfg.float("analyticity", "theta");
    let mut cutoff_l1 = cfg.float("analyticity", "cutoff_l1");
    if cutoff_l1 <= 0.0 {
        cutoff_l1 = reference_cutoff_l1()?;
    }
    let mut c0 = cfg.float("analyticity", "c0");
    if c0 <= 0.0 {
        c0 = ans_core::verifier::measure_c0(&EnsembleSpec::standard(Grid::cube(32)?, 0)?)?;
    }
    let constants = MeasuredConstants { cutoff_l1, c0 };
    let order = |key: &str| {
        usize::try_from(cfg.int("analyticity", key))
            .map_err(|_| CliError::Validation(format!("analyticity.{key} must be >= 0")))
    };
    let mut params = AnalyticityParams::from_constants(
        &constants,
        cfg.float("analyticity", "rho0"),
        p,
        theta,
        order("max_time_order")?,
        order("max_space_order")?,
    )?;
    if cfg.float("analyticity", "lambda") > 0.0 {
        params.lambda = cfg.float("analyticity", "lambda");
    }
    if cfg.float("analyticity", "r") > 0.0 {
        params.r = cfg.float("analyticity", "r");
    }
    params.validate()?;
    let (mut eta, mut growth) = constants.smallness_constants(theta);
    if cfg.float("analyticity", "eta") > 0.0 {
        eta = cfg.float("analyticity", "eta");
    }
    if cfg.float("analyticity", "growth") > 0.0 {
        growth = cfg.float("analyticity", "growth");
    }
    let fraction = cfg.float("data", "crossing_fraction");
    let mut amplitude = 1.0;
    if fraction > 0.0 {
        let crossing = crossing_amplitude(&u0, &params, eta, growth, AmplitudeScaling::Whole, 1e-12)?;
        amplitude = fraction * crossing;
        u0.scale(amplitude);
    }
    let smallness = smallness_check(&u0, &params, eta, growth)?;
    let run = evolve_radius(&sc, &u0, &params, cfg.float("analyticity", "ode_dt"))?;
    Ok(RadiusOutcome {
        constants,
        params,
        eta,
        growth,
        amplitude,
        smallness,
        run,
    })
}

/// `‖F⁻¹χ‖_{L¹}` of the cutoff profile, resolved on a 64³ box at radius 8.
pub fn reference_cutoff_l1() -> Result<f64, CliError> {
    Ok(cutoff_kernel_l1(Grid::cube(64)?, 8.0)?)
}

pub fn radius(cfg: &Config) -> Result<(), CliError> {
    let outcome = radius_outcome(cfg)?;
    let mut out = output(cfg, "radius")?;
    out.csv("radius.csv", &outcome.run.to_csv())?;
    let summary = outcome.summary();
    out.write("radius_summary.txt", summary.as_bytes())?;
    out.field("final.ansf", &outcome.run.final_state.u)?;
    out.finish(cfg)?;
    print!("{summary}");
    Ok(())
}

pub fn norms(cfg: &Config) -> Result<(), CliError> {
    let file = cfg.string("norms", "field");
    if file.is_empty() {
        return Err(CliError::Validation("norms needs --field or norms.field".into()));
    }
    let data = read_field(Path::new(file))?;
    let idx = BesovIndex::new(
        cfg.float("norms", "s"),
        cfg.float("norms", "sigma"),
        cfg.float("norms", "p"),
        cfg.boolean("norms", "homogeneous"),
    )?;
    let components = data.components();
    let norm = besov_norm_vector(&components, &idx)?;
    let mut out = output(cfg, "norms")?;
    out.csv("norms_blocks.csv", &contribution_table(&components, &idx)?)?;
    out.write("norm.txt", format!("{}\n", fmt_f64(norm)).as_bytes())?;
    out.finish(cfg)?;
    println!("{}", fmt_f64(norm));
    Ok(())
}

pub fn estimate_from(cfg: &Config) -> Result<Estimate, CliError> {
    let p = cfg.float("verify", "p");
    let s = cfg.float("verify", "s");
    let sigma = cfg.float("verify", "sigma");
    let lemma = cfg.string("verify", "lemma");
    Ok(match lemma {
        "product" => {
            let e = cfg.floats("verify", "product");
            Estimate::Product(ProductExponents {
                s0: e[0],
                s1: e[1],
                s2: e[2],
                s3: e[3],
                s4: e[4],
                sigma: e[5],
                sigma1: e[6],
                sigma2: e[7],
                p,
            })
        }
        "special-product" => Estimate::SpecialProduct { s, sigma, p },
        "interpolation" => {
            let a = cfg.floats("verify", "first");
            let b = cfg.floats("verify", "second");
            Estimate::Interpolation {
                first: (a[0], a[1]),
                second: (b[0], b[1]),
                theta: cfg.float("verify", "theta"),
                p,
            }
        }
        "multiplier" => Estimate::Multiplier {
            multiplier: Multiplier::parse(cfg.string("verify", "multiplier"))?,
            idx: BesovIndex::homogeneous(s, sigma, p)?,
        },
        "inhomogeneous-algebra" => Estimate::InhomogeneousAlgebra { s, sigma, p },
        "maximal-regularity" => Estimate::MaximalRegularity(HeatEnsemble {
            idx: BesovIndex::homogeneous(s, sigma, p)?,
            ..HeatEnsemble::standard(p)?
        }),
        other => {
            return Err(CliError::Validation(format!(
                "unknown lemma '{other}' (product, special-product, interpolation, multiplier, \
                 inhomogeneous-algebra, maximal-regularity)"
            )))
        }
    })
}

pub fn verify(cfg: &Config) -> Result<(), CliError> {
    let estimate = estimate_from(cfg)?;
    let n = usize_list::<3>(cfg, "verify", "resolution")?;
    let l = cfg.floats("grid", "lengths");
    let grid = Grid::with_dealias(n, [l[0], l[1], l[2]], cfg.float("grid", "dealias"))?;
    let b = cfg.ints("verify", "band");
    let band = (b[0] as i32, b[1] as i32, b[2] as i32, b[3] as i32);
    let trials = usize::try_from(cfg.int("verify", "trials"))
        .map_err(|_| CliError::Validation("verify.trials must be >= 1".into()))?;
    let spec = EnsembleSpec::new(trials, seed_from(cfg, "verify")?, band, grid)?;
    let report = run_estimate(&spec, &estimate)?;
    let stem = format!("verify_{}", cfg.string("verify", "lemma"));
    let mut out = output(cfg, "verify")?;
    out.csv(&format!("{stem}.csv"), &report.to_csv())?;
    out.write(&format!("{stem}.txt"), report.summary().as_bytes())?;
    out.finish(cfg)?;
    print!("{}", report.summary());
    Ok(())
}

pub fn make_data(cfg: &Config) -> Result<(), CliError> {
    let u = initial_data(&{
        let mut c = cfg.clone();
        c.set("data.field", "")?;
        c
    })?;
    let mut out = output(cfg, "make-data")?;
    let target = PathBuf::from(cfg.string("data", "out"));
    if target.is_absolute() {
        write_vector(&target, &u)?;
        println!("{}", target.display());
    } else {
        let name = target.to_string_lossy().into_owned();
        let path = out.field(&name, &u)?;
        println!("{}", path.display());
    }
    out.finish(cfg)?;
    Ok(())
}
