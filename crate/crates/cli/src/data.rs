//! Initial-data specs such as `"analytic-vertical rho=1 amp=1e-3 seed=3"`.

use std::collections::BTreeMap;

use ans_core::analyticity::analytic_vertical_data;
use ans_core::random::{random_shell, trial_rng};
use ans_core::spectral::leray_project;
use ans_core::{Grid, SpectralField, VectorField};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    Zero,
    /// `amp·(sin x cos y cos z, −cos x sin y cos z, 0)` in box units.
    TaylorGreen { amp: f64 },
    AnalyticVertical {
        rho: f64,
        amp: f64,
        horizontal_max: f64,
        seed: Option<u64>,
    },
    RandomShell {
        lo: f64,
        hi: f64,
        amp: f64,
        seed: Option<u64>,
    },
}

fn parse_args(name: &str, words: &[&str], allowed: &[&str]) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("data spec '{name}': expected key=value, got '{w}'")))?;
        if !allowed.contains(&k) {
            return Err(CliError::Validation(format!("data spec '{name}': unknown argument '{k}'")));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn number(args: &BTreeMap<String, String>, key: &str, default: Option<f64>) -> Result<f64, CliError> {
    match args.get(key) {
        Some(v) => v
            .parse()
            .map_err(|_| CliError::Validation(format!("data spec: '{key}={v}' is not a number"))),
        None => default.ok_or_else(|| CliError::Validation(format!("data spec: missing '{key}='"))),
    }
}

fn seed(args: &BTreeMap<String, String>) -> Result<Option<u64>, CliError> {
    args.get("seed")
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Validation(format!("data spec: 'seed={v}' is not an integer")))
        })
        .transpose()
}

impl DataSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let (&name, rest) = words
            .split_first()
            .ok_or_else(|| CliError::Validation("empty data spec".into()))?;
        match name {
            "zero" => {
                parse_args(name, rest, &[])?;
                Ok(DataSpec::Zero)
            }
            "taylor-green" => {
                let a = parse_args(name, rest, &["amp"])?;
                Ok(DataSpec::TaylorGreen {
                    amp: number(&a, "amp", Some(1.0))?,
                })
            }
            "analytic-vertical" => {
                let a = parse_args(name, rest, &["rho", "amp", "hmax", "seed"])?;
                Ok(DataSpec::AnalyticVertical {
                    rho: number(&a, "rho", None)?,
                    amp: number(&a, "amp", None)?,
                    horizontal_max: number(&a, "hmax", Some(f64::INFINITY))?,
                    seed: seed(&a)?,
                })
            }
            "random-shell" => {
                let a = parse_args(name, rest, &["lo", "hi", "amp", "seed"])?;
                Ok(DataSpec::RandomShell {
                    lo: number(&a, "lo", None)?,
                    hi: number(&a, "hi", None)?,
                    amp: number(&a, "amp", None)?,
                    seed: seed(&a)?,
                })
            }
            other => Err(CliError::Validation(format!("unknown data spec '{other}'"))),
        }
    }

    /// Divergence-free field on `grid`; `default_seed` applies when the spec
    /// carries no seed.
    pub fn build(&self, grid: Grid, default_seed: u64) -> Result<VectorField, CliError> {
        let u = match *self {
            DataSpec::Zero => VectorField::zeros(grid),
            DataSpec::TaylorGreen { amp } => {
                let l = grid.lengths();
                let two_pi = 2.0 * std::f64::consts::PI;
                let k = [two_pi / l[0], two_pi / l[1], two_pi / l[2]];
                VectorField::new(
                    SpectralField::from_fn(grid, |x, y, z| amp * (k[0] * x).sin() * (k[1] * y).cos() * (k[2] * z).cos()),
                    SpectralField::from_fn(grid, |x, y, z| {
                        -amp * (k[0] * x).cos() * (k[1] * y).sin() * (k[2] * z).cos()
                    }),
                    SpectralField::zeros(grid),
                )?
            }
            DataSpec::AnalyticVertical {
                rho,
                amp,
                horizontal_max,
                seed,
            } => analytic_vertical_data(
                grid,
                &mut trial_rng(seed.unwrap_or(default_seed), 0),
                rho,
                amp,
                horizontal_max,
            )?,
            DataSpec::RandomShell { lo, hi, amp, seed } => {
                if !(lo >= 0.0 && hi >= lo && amp.is_finite()) {
                    return Err(CliError::Validation(format!(
                        "random-shell needs 0 <= lo <= hi and finite amp, got lo={lo} hi={hi} amp={amp}"
                    )));
                }
                random_shell(grid, &mut trial_rng(seed.unwrap_or(default_seed), 0), lo, hi, amp)
            }
        };
        let mut u = leray_project(&u);
        u.dealias();
        u.symmetrize_hermitian();
        Ok(u)
    }
}
