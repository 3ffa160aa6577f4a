//! Run configuration: `key = value` lines grouped in `[section]`s (TOML
//! syntax), checked against a fixed schema and echoed back fully resolved.

use std::fmt::Write as _;

use ans_core::io::fmt_f64;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Ints(Vec<i64>),
    Floats(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Int,
    Float,
    Bool,
    Str,
    Ints(usize),
    Floats(usize),
}

struct Entry {
    section: &'static str,
    key: &'static str,
    kind: Kind,
    /// Default in TOML value syntax.
    default: &'static str,
}

const fn entry(section: &'static str, key: &'static str, kind: Kind, default: &'static str) -> Entry {
    Entry {
        section,
        key,
        kind,
        default,
    }
}

const SCHEMA: &[Entry] = &[
    entry("grid", "n", Kind::Ints(3), "[32, 32, 32]"),
    entry(
        "grid",
        "lengths",
        Kind::Floats(3),
        "[6.283185307179586, 6.283185307179586, 6.283185307179586]",
    ),
    entry("grid", "dealias", Kind::Float, "0.6666666666666666"),
    entry("data", "field", Kind::Str, "\"\""),
    entry("data", "spec", Kind::Str, "\"taylor-green amp=1\""),
    entry("data", "seed", Kind::Int, "0"),
    entry("data", "crossing_fraction", Kind::Float, "0.0"),
    entry("data", "out", Kind::Str, "\"data.ansf\""),
    entry("solver", "dt", Kind::Float, "0.01"),
    entry("solver", "t_end", Kind::Float, "1.0"),
    entry("solver", "cfl", Kind::Float, "0.5"),
    entry("solver", "adaptive", Kind::Bool, "true"),
    entry("solver", "sample_interval", Kind::Float, "0.1"),
    entry("solver", "cutoff", Kind::Float, "inf"),
    entry("solver", "max_time_order", Kind::Int, "8"),
    entry("output", "dir", Kind::Str, "\"\""),
    entry("output", "snapshots", Kind::Bool, "false"),
    entry("analyticity", "rho0", Kind::Float, "0.05"),
    entry("analyticity", "lambda", Kind::Float, "0.0"),
    entry("analyticity", "r", Kind::Float, "0.0"),
    entry("analyticity", "p", Kind::Float, "2.0"),
    entry("analyticity", "theta", Kind::Float, "0.5"),
    entry("analyticity", "max_time_order", Kind::Int, "3"),
    entry("analyticity", "max_space_order", Kind::Int, "8"),
    entry("analyticity", "ode_dt", Kind::Float, "0.1"),
    entry("analyticity", "c0", Kind::Float, "0.0"),
    entry("analyticity", "cutoff_l1", Kind::Float, "0.0"),
    entry("analyticity", "eta", Kind::Float, "0.0"),
    entry("analyticity", "growth", Kind::Float, "0.0"),
    entry("norms", "field", Kind::Str, "\"\""),
    entry("norms", "s", Kind::Float, "0.0"),
    entry("norms", "sigma", Kind::Float, "0.5"),
    entry("norms", "p", Kind::Float, "2.0"),
    entry("norms", "homogeneous", Kind::Bool, "true"),
    entry("verify", "lemma", Kind::Str, "\"product\""),
    entry("verify", "trials", Kind::Int, "100"),
    entry("verify", "seed", Kind::Int, "0"),
    entry("verify", "resolution", Kind::Ints(3), "[32, 32, 32]"),
    entry("verify", "band", Kind::Ints(4), "[0, 2, 0, 2]"),
    entry("verify", "p", Kind::Float, "2.0"),
    entry("verify", "s", Kind::Float, "0.0"),
    entry("verify", "sigma", Kind::Float, "0.5"),
    entry("verify", "product", Kind::Floats(8), "[1.0, 0.5, 0.5, 0.5, 0.5, 0.25, 0.25, 0.0]"),
    entry("verify", "first", Kind::Floats(2), "[-1.0, 1.0]"),
    entry("verify", "second", Kind::Floats(2), "[1.0, 0.0]"),
    entry("verify", "theta", Kind::Float, "0.5"),
    entry("verify", "multiplier", Kind::Str, "\"horizontal-riesz:1\""),
];

fn schema_index(section: &str, key: &str) -> Option<usize> {
    SCHEMA.iter().position(|e| e.section == section && e.key == key)
}

fn convert(kind: Kind, v: &toml::Value, name: &str) -> Result<Value, CliError> {
    let bad = || CliError::Validation(format!("{name}: expected {kind:?}, got {v}"));
    let float = |v: &toml::Value| -> Option<f64> {
        match v {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    };
    let list = |n: usize| -> Result<&Vec<toml::Value>, CliError> {
        match v {
            toml::Value::Array(a) if a.len() == n => Ok(a),
            _ => Err(bad()),
        }
    };
    Ok(match kind {
        Kind::Int => Value::Int(v.as_integer().ok_or_else(bad)?),
        Kind::Float => Value::Float(float(v).ok_or_else(bad)?),
        Kind::Bool => Value::Bool(v.as_bool().ok_or_else(bad)?),
        Kind::Str => Value::Str(v.as_str().ok_or_else(bad)?.to_string()),
        Kind::Ints(n) => Value::Ints(
            list(n)?
                .iter()
                .map(|x| x.as_integer().ok_or_else(bad))
                .collect::<Result<_, _>>()?,
        ),
        Kind::Floats(n) => Value::Floats(
            list(n)?
                .iter()
                .map(|x| float(x).ok_or_else(bad))
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn parse_value(kind: Kind, raw: &str, name: &str) -> Result<Value, CliError> {
    if kind == Kind::Str && !raw.trim_start().starts_with('"') {
        return Ok(Value::Str(raw.to_string()));
    }
    let text = match kind {
        Kind::Ints(_) | Kind::Floats(_) if !raw.trim_start().starts_with('[') => format!("v = [{raw}]"),
        _ => format!("v = {raw}"),
    };
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{name}: cannot parse '{raw}': {e}")))?;
    convert(kind, &table["v"], name)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    values: Vec<Value>,
}

impl Default for Config {
    fn default() -> Self {
        let values = SCHEMA
            .iter()
            .map(|e| parse_value(e.kind, e.default, e.key).expect("schema default parses"))
            .collect();
        Self { values }
    }
}

impl Config {
    /// Defaults overlaid with the file contents; unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        let mut cfg = Self::default();
        for (section, body) in &table {
            let body = body
                .as_table()
                .ok_or_else(|| CliError::Validation(format!("config: '{section}' must be a [section]")))?;
            for (key, v) in body {
                let name = format!("{section}.{key}");
                let i = schema_index(section, key)
                    .ok_or_else(|| CliError::Validation(format!("config: unknown key '{name}'")))?;
                cfg.values[i] = convert(SCHEMA[i].kind, v, &name)?;
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Overrides `section.key` with a value in config syntax (strings may
    /// be bare, lists may omit brackets).
    pub fn set(&mut self, name: &str, raw: &str) -> Result<(), CliError> {
        let (section, key) = name
            .split_once('.')
            .ok_or_else(|| CliError::Validation(format!("override '{name}' must be section.key")))?;
        let i = schema_index(section, key)
            .ok_or_else(|| CliError::Validation(format!("unknown key '{name}'")))?;
        self.values[i] = parse_value(SCHEMA[i].kind, raw, name)?;
        Ok(())
    }

    /// `section.key=value` form of [`Config::set`].
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), CliError> {
        let (name, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("override '{assignment}' must be section.key=value")))?;
        self.set(name.trim(), raw.trim())
    }

    fn get(&self, section: &str, key: &str) -> &Value {
        let i = schema_index(section, key).unwrap_or_else(|| panic!("{section}.{key} is not in the schema"));
        &self.values[i]
    }

    pub fn float(&self, section: &str, key: &str) -> f64 {
        match self.get(section, key) {
            Value::Float(v) => *v,
            other => panic!("{section}.{key} is {other:?}"),
        }
    }

    pub fn int(&self, section: &str, key: &str) -> i64 {
        match self.get(section, key) {
            Value::Int(v) => *v,
            other => panic!("{section}.{key} is {other:?}"),
        }
    }

    pub fn boolean(&self, section: &str, key: &str) -> bool {
        match self.get(section, key) {
            Value::Bool(v) => *v,
            other => panic!("{section}.{key} is {other:?}"),
        }
    }

    pub fn string(&self, section: &str, key: &str) -> &str {
        match self.get(section, key) {
            Value::Str(v) => v,
            other => panic!("{section}.{key} is {other:?}"),
        }
    }

    pub fn ints(&self, section: &str, key: &str) -> &[i64] {
        match self.get(section, key) {
            Value::Ints(v) => v,
            other => panic!("{section}.{key} is {other:?}"),
        }
    }

    pub fn floats(&self, section: &str, key: &str) -> &[f64] {
        match self.get(section, key) {
            Value::Floats(v) => v,
            other => panic!("{section}.{key} is {other:?}"),
        }
    }

    /// Every key with its resolved value, in schema order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (e, v) in SCHEMA.iter().zip(&self.values) {
            if e.section != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = e.section;
                let _ = writeln!(out, "[{section}]");
            }
            let text = match v {
                Value::Int(i) => i.to_string(),
                Value::Float(f) => fmt_f64(*f),
                Value::Bool(b) => b.to_string(),
                Value::Str(s) => toml::Value::String(s.clone()).to_string(),
                Value::Ints(xs) => format!(
                    "[{}]",
                    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
                ),
                Value::Floats(xs) => format!("[{}]", xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ")),
            };
            let _ = writeln!(out, "{} = {text}", e.key);
        }
        out
    }
}
