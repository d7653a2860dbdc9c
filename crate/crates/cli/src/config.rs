//! JSON run configurations: schema check, presets and defaults.

use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use levyturb::diffusion::default_cutoff;
use levyturb::solver::SolverConfig;
use levyturb::FractionalOrders;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Named `(beta, mu)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Gaussian dissipation, memoryless: E(k) ~ k^-5/3, eta = 1.
    Kolmogorov,
    /// beta = 2/3: E(k) ~ k^-23/9, eta = 3.
    Richardson,
    /// beta = 1: E(k) ~ k^-7/3, eta = 2.
    Ballistic,
    /// beta = 1/2: E(k) ~ k^-8/3.
    BoundaryLayer,
    /// beta = 2, mu = 1/2: E(k) ~ k^-7/5, eta = 1/2.
    Magnetic,
}

impl Preset {
    pub fn orders(self) -> FractionalOrders {
        let (beta, mu) = match self {
            Preset::Kolmogorov => (2.0, 0.0),
            Preset::Richardson => (2.0 / 3.0, 0.0),
            Preset::Ballistic => (1.0, 0.0),
            Preset::BoundaryLayer => (0.5, 0.0),
            Preset::Magnetic => (2.0, 0.5),
        };
        FractionalOrders::new(beta, mu).expect("preset orders are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

/// Allowed keys, nested objects carrying their own schema.
enum Schema {
    Leaf,
    Object(&'static [(&'static str, Schema)]),
}

use Schema::{Leaf, Object};

const ORDERS: Schema = Object(&[("beta", Leaf), ("mu", Leaf)]);

const NS_SCHEMA: Schema = Object(&[
    ("preset", Leaf),
    ("grid", Object(&[("dims", Leaf), ("n", Leaf), ("length", Leaf)])),
    ("orders", ORDERS),
    ("nu", Leaf),
    ("dt", Leaf),
    ("t_end", Leaf),
    (
        "forcing",
        Object(&[
            ("type", Leaf),
            ("k_lo", Leaf),
            ("k_hi", Leaf),
            ("amplitude", Leaf),
            ("seed", Leaf),
        ]),
    ),
    ("dealias", Leaf),
    ("history_len", Leaf),
    ("seed", Leaf),
    ("cfl", Leaf),
    ("nonlinear", Leaf),
    (
        "initial",
        Object(&[
            ("shape", Leaf),
            ("k_peak", Leaf),
            ("width", Leaf),
            ("energy", Leaf),
            ("k", Leaf),
        ]),
    ),
    ("snapshot_times", Leaf),
    ("memory_tolerance", Leaf),
]);

const CTRW_SCHEMA: Schema = Object(&[
    ("preset", Leaf),
    ("orders", ORDERS),
    ("n_particles", Leaf),
    ("t_max", Leaf),
    ("seed", Leaf),
    ("truncation", Leaf),
    ("q", Leaf),
]);

fn unknown_keys(value: &Value, schema: &Schema, path: &str, out: &mut Vec<String>) {
    let (Value::Object(map), Object(fields)) = (value, schema) else {
        return;
    };
    for (key, child) in map {
        let full = if path.is_empty() {
            key.clone()
        } else {
            format!("{path}.{key}")
        };
        match fields.iter().find(|(name, _)| name == key) {
            Some((_, sub)) => unknown_keys(child, sub, &full, out),
            None => out.push(full),
        }
    }
}

/// Particle-ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CtrwConfig {
    pub orders: FractionalOrders,
    pub n_particles: usize,
    pub t_max: f64,
    pub seed: u64,
    /// Jump cutoff; omitted means untruncated for `beta = 2` and the default cutoff otherwise.
    pub truncation: Option<f64>,
    /// Moment order for the width estimate; omitted means the library default.
    pub q: Option<f64>,
}

impl Default for CtrwConfig {
    fn default() -> Self {
        Self {
            orders: FractionalOrders::kolmogorov(),
            n_particles: 10_000,
            t_max: 1000.0,
            seed: 1,
            truncation: None,
            q: None,
        }
    }
}

impl CtrwConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_particles == 0 {
            out.push("n_particles must be >= 1".to_string());
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            out.push(format!("t_max must be > 0, got {}", self.t_max));
        }
        if let Some(c) = self.truncation {
            if !(c > 0.0) {
                out.push(format!("truncation must be > 0, got {c}"));
            }
        }
        if let Some(q) = self.q {
            if !(q.is_finite() && q > 0.0) {
                out.push(format!("q must be > 0, got {q}"));
            }
        }
        out
    }

    /// Fill in the cutoff so the manifest records what actually ran.
    pub fn resolve(&mut self) {
        if self.truncation.is_none() && self.orders.beta() < 2.0 && self.t_max > 0.0 {
            self.truncation = Some(default_cutoff(self.orders, self.t_max));
        }
    }
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{} is not valid JSON: {e}", path.display())))
}

/// Schema check, preset expansion and deserialization shared by both run configs.
fn prepare<T: for<'de> Deserialize<'de> + Serialize + Default>(
    mut value: Value,
    schema: &Schema,
    preset_flag: Option<Preset>,
) -> Result<T, CliError> {
    let Value::Object(ref mut map) = value else {
        return Err(CliError::config("config must be a JSON object"));
    };
    if map.is_empty() {
        let defaults = serde_json::to_string_pretty(&T::default()).expect("defaults serialize");
        return Err(CliError::EmptyConfig(defaults));
    }
    let mut unknown = Vec::new();
    unknown_keys(&Value::Object(map.clone()), schema, "", &mut unknown);
    if !unknown.is_empty() {
        return Err(CliError::config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let preset = match map.remove("preset") {
        None => preset_flag,
        Some(v) => {
            let p: Preset = serde_json::from_value(v)
                .map_err(|e| CliError::config(format!("preset: {e}")))?;
            if preset_flag.is_some_and(|f| f != p) {
                return Err(CliError::config("--preset disagrees with the config's preset"));
            }
            Some(p)
        }
    };
    if let Some(p) = preset {
        if map.contains_key("orders") {
            return Err(CliError::config("give either a preset or explicit orders, not both"));
        }
        map.insert(
            "orders".into(),
            serde_json::to_value(p.orders()).expect("orders serialize"),
        );
    }
    serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))
}

pub fn ns_config(value: Value, preset: Option<Preset>, seed: Option<u64>) -> Result<SolverConfig, CliError> {
    let mut cfg: SolverConfig = prepare(value, &NS_SCHEMA, preset)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(CliError::config(problems.join("; ")));
    }
    Ok(cfg)
}

pub fn ctrw_config(value: Value, preset: Option<Preset>, seed: Option<u64>) -> Result<CtrwConfig, CliError> {
    let mut cfg: CtrwConfig = prepare(value, &CTRW_SCHEMA, preset)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(CliError::config(problems.join("; ")));
    }
    cfg.resolve();
    Ok(cfg)
}

/// The config as a JSON object, for manifests.
pub fn snapshot<T: Serialize>(cfg: &T) -> Map<String, Value> {
    match serde_json::to_value(cfg).expect("config serializes") {
        Value::Object(m) => m,
        _ => unreachable!("configs are structs"),
    }
}
