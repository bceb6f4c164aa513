//! Declarative run configuration.
//!
//! A config file is TOML with an optional top-level `seed` and one section
//! per subcommand. Unknown keys are rejected everywhere. Every section is
//! echoed into the report with its defaults filled in.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub analyze: Option<AnalyzeConfig>,
    pub verify_fe: Option<VerifyFeConfig>,
    pub esslim: Option<EsslimConfig>,
    pub sequences: Option<SequencesConfig>,
    pub phi: Option<PhiConfig>,
    pub table: Option<TableConfig>,
    /// Directory against which `csv:` paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, dir).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.into()
        } else {
            self.base_dir.join(p)
        }
    }
}

pub(crate) fn require_positive(pairs: &[(&str, f64)]) -> Result<()> {
    match pairs.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        Some((name, v)) => Err(CliError::Config(format!("{name} must be a positive number, got {v}"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Karamata,
    Beurling,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorName {
    Terminal,
    Extrapolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TestSetConfig {
    pub base: (f64, f64),
    pub holes: Vec<(f64, f64)>,
    /// Alternative to `holes`: remove this fraction of the base in `hole_count` equal holes.
    pub hole_fraction: Option<f64>,
    pub hole_count: usize,
}

impl Default for TestSetConfig {
    fn default() -> Self {
        Self { base: (1.0, 2.0), holes: Vec::new(), hole_fraction: None, hole_count: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeConfig {
    /// Builtin expression or `csv:<path>`.
    pub f: String,
    pub mode: ModeName,
    pub phi: Option<String>,
    pub h: Option<String>,
    pub sequence: String,
    pub sequence_kind: String,
    pub n: usize,
    pub test_set: TestSetConfig,
    /// `reciprocal` or `csv:<path>` with columns `n,value`.
    pub a_n: String,
    pub lattice_points: usize,
    pub s_span: Option<usize>,
    pub estimator: EstimatorName,
    pub log_degree: usize,
    pub levels: usize,
    pub osc_tol: f64,
    pub budget: f64,
    pub segment_tol: f64,
    pub ell: Option<String>,
    pub corollary_tol: f64,
    pub uct: bool,
    pub uct_points: usize,
    pub uct_ladder: Vec<usize>,
    pub uct_tol: f64,
    pub trivial_tol: f64,
    pub sigma_tol: f64,
    pub phi_tol: f64,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            f: String::new(),
            mode: ModeName::Karamata,
            phi: None,
            h: None,
            sequence: "identity".into(),
            sequence_kind: "multiplicative".into(),
            n: 1_000_000,
            test_set: TestSetConfig::default(),
            a_n: "reciprocal".into(),
            lattice_points: 201,
            s_span: None,
            estimator: EstimatorName::Extrapolated,
            log_degree: 2,
            levels: 8,
            osc_tol: 1e-2,
            budget: 0.02,
            segment_tol: 0.05,
            ell: None,
            corollary_tol: 1e-2,
            uct: true,
            uct_points: 31,
            uct_ladder: Vec::new(),
            uct_tol: 1e-2,
            trivial_tol: 1e-9,
            sigma_tol: 1e-6,
            phi_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyFeConfig {
    /// Popa parameters; numbers or `"inf"`.
    pub r: Vec<String>,
    pub s: Vec<String>,
    pub kappa: Vec<f64>,
    pub trials: usize,
    /// Also evaluate every cell at this point.
    pub t: Option<f64>,
    /// Group-law sweep over each `r` with this many triples; 0 skips it.
    pub law_trials: usize,
    /// Replace each kernel by a perturbed one to show a non-zero residual.
    pub broken: bool,
}

impl Default for VerifyFeConfig {
    fn default() -> Self {
        let params = || vec!["0".to_string(), "1".to_string(), "inf".to_string()];
        Self {
            r: params(),
            s: params(),
            kappa: vec![-2.0, -0.5, 0.0, 1.0, 3.0],
            trials: 1000,
            t: None,
            law_trials: 0,
            broken: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Geometric,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsslimConfig {
    pub f: String,
    pub x_lo: f64,
    pub x_hi: f64,
    pub samples: usize,
    pub grid: GridKind,
    pub epsilons: Vec<f64>,
    pub delta: f64,
    /// Second function for the sum/product closure check.
    pub g: Option<String>,
    pub delta_g: f64,
    /// Increments `f(x + u) − f(x)` for the additivity check.
    pub increment: Option<(f64, f64)>,
}

impl Default for EsslimConfig {
    fn default() -> Self {
        Self {
            f: String::new(),
            x_lo: 1.0,
            x_hi: 1e6,
            samples: 100_000,
            grid: GridKind::Geometric,
            epsilons: regvar_core::esslim::DEFAULT_EPSILONS.to_vec(),
            delta: regvar_core::esslim::DEFAULT_DELTA,
            g: None,
            delta_g: 0.0,
            increment: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CroftConfig {
    pub interval: (f64, f64),
    /// `periodic(a, b)` for the union of `(k + a, k + b)`, or `half_line(c)`.
    pub target: String,
    pub horizons: Vec<usize>,
    pub probes: usize,
}

impl Default for CroftConfig {
    fn default() -> Self {
        Self {
            interval: (0.0, 1.0),
            target: "periodic(0, 0.5)".into(),
            horizons: vec![10_000, 100_000, 1_000_000],
            probes: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub phi: String,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    #[serde(default = "default_q_tol")]
    pub q_tol: f64,
}

fn default_q_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequencesConfig {
    pub sequence: String,
    pub kind: String,
    /// Prefix length for the admissibility report.
    pub n: usize,
    pub n0: usize,
    pub tol: f64,
    pub croft: Option<CroftConfig>,
    pub solve: Option<SolveConfig>,
}

impl Default for SequencesConfig {
    fn default() -> Self {
        Self {
            sequence: "log_ramp(1)".into(),
            kind: "additive".into(),
            n: 100_000,
            n0: 100,
            tol: 0.02,
            croft: None,
            solve: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiConfig {
    pub phi: String,
    pub x_grid: Option<Vec<f64>>,
    pub t_max: f64,
    pub t_points: usize,
    pub tol: f64,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self { phi: String::new(), x_grid: None, t_max: 3.0, t_points: 31, tol: regvar_core::phi::DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableConfig {
    pub f: String,
    pub x_lo: f64,
    pub x_hi: f64,
    pub points: usize,
    pub grid: GridKind,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self { f: String::new(), x_lo: 1.0, x_hi: 1e6, points: 1000, grid: GridKind::Geometric }
    }
}
