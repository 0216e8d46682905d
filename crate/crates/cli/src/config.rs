//! Experiment configuration files.
//!
//! A configuration is a JSON document. Only `family` is required; every other
//! field has a default, and the manifest echoes the configuration with all
//! defaults filled in.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use inner_circle::catalog;
use inner_circle::criteria::CriterionParams;
use inner_circle::{Arc, FamilySpec};
use serde::{Deserialize, Serialize};

/// A catalog name or an explicit family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyRef {
    Named(String),
    Spec(FamilySpec),
}

impl FamilyRef {
    pub fn resolve(&self) -> Result<FamilySpec> {
        let spec = match self {
            FamilyRef::Named(name) => match catalog::find(name) {
                Some(entry) => entry.spec,
                None => bail!("unknown family `{name}` (see `list-families`)"),
            },
            FamilyRef::Spec(spec) => spec.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryExperiment {
    Ks,
    Norms,
    Mixing,
    Recurrence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Ledger length `N`.
    pub n: usize,
    /// Number of log-spaced `N` at which the series tables are sampled.
    pub series_points: usize,
    pub params: CriterionParams,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            series_points: 48,
            params: CriterionParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub experiments: Vec<BoundaryExperiment>,
    /// Ensemble size `S`.
    pub samples: usize,
    /// Number of pushes checked for uniformity.
    pub ks_steps: usize,
    pub ells: Vec<u32>,
    pub checkpoints: Vec<usize>,
    pub mixing_times: Vec<usize>,
    pub arc_a: Arc,
    pub arc_b: Arc,
    pub recurrence_arc: Arc,
    pub recurrence_horizon: usize,
    pub max_returns: usize,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            experiments: vec![
                BoundaryExperiment::Ks,
                BoundaryExperiment::Norms,
                BoundaryExperiment::Mixing,
                BoundaryExperiment::Recurrence,
            ],
            samples: 100_000,
            ks_steps: 100,
            ells: vec![1, 2, 3, 4],
            checkpoints: vec![100, 1000],
            mixing_times: vec![1, 10, 100, 1000],
            arc_a: Arc::upper_half(),
            arc_b: Arc::upper_half(),
            recurrence_arc: Arc {
                start_angle: 0.0,
                end_angle: FRAC_PI_4,
            },
            recurrence_horizon: 1000,
            max_returns: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Fourier checks cover every `0 ≤ m < n ≤ fourier_n_max`.
    pub fourier_n_max: usize,
    pub fourier_ell_max: u32,
    /// Smallest quadrature grid.
    pub fourier_nodes: usize,
    pub fourier_tolerance: f64,
    pub norm_samples: usize,
    pub norm_checkpoints: Vec<usize>,
    pub norm_ell_max: u32,
    /// Norm checks pass within `norm_sigmas / √S`.
    pub norm_sigmas: f64,
    pub lowner_triples: usize,
    pub lowner_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            fourier_n_max: 6,
            fourier_ell_max: 4,
            fourier_nodes: 8,
            fourier_tolerance: 1e-8,
            norm_samples: 100_000,
            norm_checkpoints: vec![100, 1000],
            norm_ell_max: 4,
            norm_sigmas: 5.0,
            lowner_triples: 20,
            lowner_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Csv,
            plots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyRef,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn new(family: FamilyRef) -> Self {
        Self {
            family,
            seed: default_seed(),
            classify: ClassifyConfig::default(),
            boundary: BoundaryConfig::default(),
            verify: VerifyConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn for_family(name: &str) -> Self {
        Self::new(FamilyRef::Named(name.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).context("malformed config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// The catalog name, or the family kind for explicit specs.
    pub fn family_label(&self) -> String {
        match &self.family {
            FamilyRef::Named(name) => name.clone(),
            FamilyRef::Spec(spec) => spec.name().to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field used by any command.
    pub fn validate(&self) -> Result<()> {
        self.family.resolve()?;

        let c = &self.classify;
        ensure!(c.n >= 100, "classify.n must be at least 100, got {}", c.n);
        ensure!(c.series_points >= 2, "classify.series_points must be at least 2");
        c.params.validate()?;

        let b = &self.boundary;
        ensure!(b.samples >= 1, "boundary.samples must be positive");
        ensure!(!b.ells.is_empty() && b.ells.iter().all(|&l| l >= 1), "boundary.ells must be non-empty and positive");
        ensure!(
            !b.checkpoints.is_empty() && b.checkpoints.iter().all(|&n| n >= 1),
            "boundary.checkpoints must be non-empty and positive"
        );
        ensure!(!b.mixing_times.is_empty(), "boundary.mixing_times must be non-empty");
        ensure!(b.recurrence_horizon >= 1, "boundary.recurrence_horizon must be positive");
        for (name, arc) in [("arc_a", &b.arc_a), ("arc_b", &b.arc_b), ("recurrence_arc", &b.recurrence_arc)] {
            arc.validate().with_context(|| format!("boundary.{name}"))?;
        }

        let v = &self.verify;
        ensure!(v.fourier_n_max >= 1, "verify.fourier_n_max must be positive");
        ensure!(v.fourier_ell_max >= 1, "verify.fourier_ell_max must be positive");
        ensure!(v.fourier_tolerance > 0.0, "verify.fourier_tolerance must be positive");
        ensure!(v.norm_samples >= 1 && v.lowner_samples >= 1, "verify sample sizes must be positive");
        ensure!(
            !v.norm_checkpoints.is_empty() && v.norm_checkpoints.iter().all(|&n| n >= 1),
            "verify.norm_checkpoints must be non-empty and positive"
        );
        ensure!(v.norm_ell_max >= 1, "verify.norm_ell_max must be positive");
        ensure!(v.norm_sigmas > 0.0, "verify.norm_sigmas must be positive");
        Ok(())
    }
}
