//! Run configuration: a TOML document describing one system and one task.

use std::path::{Path, PathBuf};

use logicint::matrix::{c64, CMatrix};
use logicint::{Bond, BondKind, BondSystem};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// A complex number in its serialized form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<num_complex::Complex64> for ComplexPair {
    fn from(z: num_complex::Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexPair> for num_complex::Complex64 {
    fn from(p: ComplexPair) -> Self {
        c64(p.re, p.im)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub system: SystemConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub sites: usize,
    #[serde(default)]
    pub bonds: Vec<BondConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BondConfig {
    pub sites: Vec<usize>,
    pub coupling: f64,
    pub kind: BondKindConfig,
    /// Row-major entries, only for `kind = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexPair>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BondKindConfig {
    Exchange,
    Antiferro,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Exact,
    Series,
    Mc,
    SpanTest,
    UnitModulus,
    IsingUnitarity,
    IsingPartition,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Exact => "exact",
            TaskKind::Series => "series",
            TaskKind::Mc => "mc",
            TaskKind::SpanTest => "span-test",
            TaskKind::UnitModulus => "unit-modulus",
            TaskKind::IsingUnitarity => "ising-unitarity",
            TaskKind::IsingPartition => "ising-partition",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_support: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_space: Option<f64>,
    /// Sign of the imaginary time coupling `β₁ = ±iπ/4` for the Ising
    /// tasks; defaults to "-", the sign matching the two-site matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1_sign: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// Errors split by exit code: parse failures (exit 2) versus semantic
/// violations detected by the library (exit 3/4).
#[derive(Debug)]
pub enum ConfigError {
    Parse(String),
    Semantic(logicint::Error),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(msg) => write!(f, "{msg}"),
            ConfigError::Semantic(e) => write!(f, "{e}"),
        }
    }
}

impl From<logicint::Error> for ConfigError {
    fn from(e: logicint::Error) -> Self {
        ConfigError::Semantic(e)
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigError::Parse(format!("cannot read config {}: {e}", path.display()))
    })?;
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| ConfigError::Parse(format!("config {}: {e}", path.display())))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::Parse(format!(
            "config {}: schema_version {} unsupported (expected {SCHEMA_VERSION})",
            path.display(),
            config.schema_version
        )));
    }
    Ok(config)
}

/// Build the validated system, surfacing bond errors with their index.
pub fn build_system(config: &RunConfig) -> Result<BondSystem, ConfigError> {
    let mut bonds = Vec::with_capacity(config.system.bonds.len());
    for (idx, b) in config.system.bonds.iter().enumerate() {
        let kind = match b.kind {
            BondKindConfig::Exchange => BondKind::Exchange,
            BondKindConfig::Antiferro => BondKind::Antiferro,
            BondKindConfig::Custom => {
                let rows = b.matrix.as_ref().ok_or_else(|| {
                    ConfigError::Semantic(logicint::Error::ContractViolation(format!(
                        "bond {idx} is custom but has no matrix"
                    )))
                })?;
                let nrows = rows.len();
                let ncols = rows.first().map_or(0, |r| r.len());
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(ConfigError::Semantic(
                        logicint::Error::ContractViolation(format!(
                            "bond {idx} custom matrix rows have uneven lengths"
                        )),
                    ));
                }
                let m = CMatrix::from_fn(nrows, ncols, |r, c| rows[r][c].into());
                BondKind::Custom(m)
            }
        };
        if b.kind != BondKindConfig::Custom && b.matrix.is_some() {
            return Err(ConfigError::Semantic(logicint::Error::ContractViolation(
                format!("bond {idx} has a matrix but is not custom"),
            )));
        }
        bonds.push(Bond {
            sites: b.sites.clone(),
            coupling: b.coupling,
            kind,
        });
    }
    Ok(BondSystem::new(config.system.sites, bonds)?)
}

/// Parse the `beta1_sign` key into the signed imaginary coupling.
pub fn beta1_from_sign(task: &TaskConfig) -> Result<num_complex::Complex64, ConfigError> {
    let sign = match task.beta1_sign.as_deref() {
        None | Some("-") => -1.0,
        Some("+") => 1.0,
        Some(other) => {
            return Err(ConfigError::Semantic(logicint::Error::InvalidArgument(
                format!("beta1_sign must be \"+\" or \"-\", got {other:?}"),
            )))
        }
    };
    Ok(c64(0.0, sign * std::f64::consts::FRAC_PI_4))
}

/// Fetch a required task parameter or fail naming it.
pub fn require<T: Copy>(value: Option<T>, name: &str, task: TaskKind) -> Result<T, ConfigError> {
    value.ok_or_else(|| {
        ConfigError::Semantic(logicint::Error::InvalidArgument(format!(
            "task {} requires the {name} parameter",
            task.name()
        )))
    })
}
