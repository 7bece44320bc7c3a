//! Experiment configuration: a single TOML file with nested key-value
//! blocks, plus dotted-path command-line overrides.

use std::path::{Path, PathBuf};

use bef_core::eigensolve::LanczosOptions;
use bef_core::model::{ModelSpec, SiteOrdering};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on the number of sites unless `BEF_MAX_N` raises it.
pub const HARD_CAP_N: usize = 22;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid --set override '{0}': expected key.path=value")]
    BadOverride(String),
    #[error("config field error: {0}")]
    Field(String),
    #[error(
        "budget exceeded: n = {n} needs about {gib:.1} GiB of Krylov storage \
         (cap is n = {cap}; raise BEF_MAX_N on a large-memory machine)"
    )]
    BudgetExceeded { n: usize, cap: usize, gib: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default = "default_ordering")]
    pub ordering: SiteOrdering,
    pub ranges: Ranges,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub suites: Suites,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub run: RunBlock,
}

fn default_ordering() -> SiteOrdering {
    SiteOrdering::Append
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ranges {
    /// Inclusive `[min, max]` window of system sizes.
    pub n: (usize, usize),
    /// Inclusive `[min, max]` window of radii.
    #[serde(default = "default_r_range")]
    pub r: (usize, usize),
}

fn default_r_range() -> (usize, usize) {
    (1, 6)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub degeneracy_tol: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let d = LanczosOptions::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            seed: d.seed,
            degeneracy_tol: d.degeneracy_tol,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Suites {
    pub eta_scan: Option<EtaScanParams>,
    pub correlations: Option<CorrelationParams>,
    pub entropy_scan: Option<EntropyScanParams>,
    pub gap_scan: Option<GapScanParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaScanParams {
    /// Region `A = 1..=m`.
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationParams {
    /// Pauli pairs like `"ZZ"`, `"XY"`; empty means all nine combinations.
    pub pauli_pairs: Vec<String>,
}

impl Default for CorrelationParams {
    fn default() -> Self {
        Self {
            pauli_pairs: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyScanParams {
    pub m: usize,
    pub q: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapScanParams {
    /// Coupling name to sweep, e.g. `"g_x"`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(format!("unknown format '{other}' (csv|json|svg)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    /// Worker threads for profile cells; 0 means one per core.
    pub threads: usize,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self { threads: 0 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        value
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Effective site cap: `BEF_MAX_N` override or the built-in hard cap.
    pub fn effective_cap() -> usize {
        std::env::var("BEF_MAX_N")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(HARD_CAP_N)
    }

    /// Validate ranges and the memory budget. Refuses before any allocation
    /// or file output happens.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model
            .validate()
            .map_err(|e| ConfigError::Field(e.to_string()))?;
        let (n_min, n_max) = self.ranges.n;
        let (r_min, r_max) = self.ranges.r;
        if n_min < 2 || n_min > n_max {
            return Err(ConfigError::Field(format!(
                "ranges.n must satisfy 2 <= min <= max, got [{n_min}, {n_max}]"
            )));
        }
        if r_min < 1 || r_min > r_max {
            return Err(ConfigError::Field(format!(
                "ranges.r must satisfy 1 <= min <= max, got [{r_min}, {r_max}]"
            )));
        }
        let cap = Self::effective_cap();
        if n_max > cap {
            let bytes = (1u128 << n_max) * 16 * (self.solver.max_iter as u128 + 6);
            return Err(ConfigError::BudgetExceeded {
                n: n_max,
                cap,
                gib: bytes as f64 / (1u64 << 30) as f64,
            });
        }
        if let SiteOrdering::Bridge { left } = self.ordering {
            if n_min < left + 2 {
                return Err(ConfigError::Field(format!(
                    "bridge ordering with left = {left} needs n >= {}",
                    left + 2
                )));
            }
        }
        if self.output.formats.is_empty() {
            return Err(ConfigError::Field("output.formats must be nonempty".into()));
        }
        if let Some(eta) = &self.suites.eta_scan {
            if eta.m == 0 || eta.m >= n_min {
                return Err(ConfigError::Field(format!(
                    "suites.eta_scan.m must satisfy 1 <= m < n_min, got {}",
                    eta.m
                )));
            }
        }
        if let Some(ent) = &self.suites.entropy_scan {
            if ent.m == 0 || ent.q == 0 || ent.m + ent.q >= n_max {
                return Err(ConfigError::Field(
                    "suites.entropy_scan needs m >= 1, q >= 1, m + q < n_max".into(),
                ));
            }
        }
        if let Some(gap) = &self.suites.gap_scan {
            if gap.values.is_empty() {
                return Err(ConfigError::Field("suites.gap_scan.values is empty".into()));
            }
        }
        Ok(())
    }

    pub fn lanczos_options(&self) -> LanczosOptions {
        LanczosOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            seed: self.solver.seed,
            degeneracy_tol: self.solver.degeneracy_tol,
            max_n: Self::effective_cap(),
        }
    }
}

fn parse_leaf(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    // Arrays and quoted strings parse as TOML value expressions.
    if let Ok(v) = raw.parse::<toml::Value>() {
        return v;
    }
    toml::Value::String(raw.to_string())
}

/// Apply one `key.path=value` override onto the parsed config tree.
fn apply_override(root: &mut toml::Value, spec: &str) -> Result<(), ConfigError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::BadOverride(spec.to_string()));
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        node = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
    table.insert(keys[keys.len() - 1].to_string(), parse_leaf(raw.trim()));
    Ok(())
}

/// Deterministic file stem for a model's artifacts.
pub fn sanitize_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Convenience used by tests and docs: smallest complete config text.
pub fn example_config() -> &'static str {
    r#"[model]
family = "tfim"
id = "tfim_g2"

[model.couplings]
J_zz = 1.0
g_x = 2.0

[ranges]
n = [8, 12]
r = [1, 5]

[solver]
tol = 1e-12
max_iter = 500
seed = 7
degeneracy_tol = 1e-8

[suites.eta_scan]
m = 5

[output]
directory = "out"
formats = ["csv", "json"]
"#
}
