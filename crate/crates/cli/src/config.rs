//! JSON configuration files of the subcommands, with exhaustive
//! validation before any work starts.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use fairsel::data::FairnessKind;
use fairsel::train::{Kernel, Schedule};
use fairsel::{HyperParams, TrainConfig};

use crate::CliError;

pub fn read_config<C: serde::de::DeserializeOwned>(path: &Path) -> Result<C, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(vec![format!("config parse: {e}")]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKindName {
    Svm,
    Logreg,
    Ksvm,
    Multisvm,
    Blackbox,
}

impl ModelKindName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "svm" => Some(Self::Svm),
            "logreg" => Some(Self::Logreg),
            "ksvm" => Some(Self::Ksvm),
            "multisvm" => Some(Self::Multisvm),
            "blackbox" => Some(Self::Blackbox),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Svm => "svm",
            Self::Logreg => "logreg",
            Self::Ksvm => "ksvm",
            Self::Multisvm => "multisvm",
            Self::Blackbox => "blackbox",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
pub struct KernelSection {
    pub kind: String,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub degree: Option<u32>,
    #[serde(default)]
    pub coef: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
pub struct TrainSection {
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub base_rate: Option<f64>,
    #[serde(default)]
    pub schedule: Option<String>,
    #[serde(default)]
    pub averaging: Option<bool>,
    #[serde(default)]
    pub kernel: Option<KernelSection>,
}

impl TrainSection {
    pub fn build(&self, lambda: f64, seed: u64, errors: &mut Vec<String>) -> TrainConfig {
        let mut cfg = TrainConfig::default_for(lambda);
        cfg.seed = seed;
        if let Some(it) = self.iterations {
            if it == 0 {
                errors.push("train.iterations must be positive".into());
            }
            cfg.iterations = it;
        }
        if let Some(r) = self.base_rate {
            if !(r > 0.0) {
                errors.push("train.base_rate must be > 0".into());
            }
            cfg.base_rate = r;
        }
        if let Some(s) = &self.schedule {
            match s.as_str() {
                "inverse-sqrt" => cfg.schedule = Schedule::InverseSqrt,
                "inverse-linear" => cfg.schedule = Schedule::InverseLinear,
                other => errors.push(format!("unknown train.schedule {other:?}")),
            }
        }
        if let Some(a) = self.averaging {
            cfg.averaging = a;
        }
        if let Some(k) = &self.kernel {
            match k.kind.as_str() {
                "linear" => cfg.kernel = Kernel::Linear,
                "rbf" => {
                    let gamma = k.gamma.unwrap_or(1.0);
                    if !(gamma > 0.0) {
                        errors.push("kernel.gamma must be > 0".into());
                    }
                    cfg.kernel = Kernel::Rbf { gamma };
                }
                "poly" => {
                    let degree = k.degree.unwrap_or(2);
                    if degree == 0 {
                        errors.push("kernel.degree must be >= 1".into());
                    }
                    cfg.kernel = Kernel::Polynomial { degree, coef: k.coef.unwrap_or(1.0) };
                }
                other => errors.push(format!("unknown kernel.kind {other:?}")),
            }
        }
        cfg
    }
}

fn default_delta() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
pub struct FitConfig {
    pub dataset: PathBuf,
    pub schema: PathBuf,
    pub model: String,
    pub fairness: String,
    pub t: f64,
    pub lambda: f64,
    pub rho: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub split_ratio: Option<f64>,
    #[serde(default)]
    pub train: TrainSection,
}

pub struct FitPlan {
    pub model: ModelKindName,
    pub fairness: FairnessKind,
    pub hyper: HyperParams,
    pub train: TrainConfig,
    pub seed: u64,
    pub split_ratio: Option<f64>,
}

/// Validates every field, collecting all problems before reporting.
pub fn validate_fit(cfg: &FitConfig, seed_override: Option<u64>, needs_blackbox: bool) -> Result<FitPlan, CliError> {
    let mut errors = Vec::new();
    let model = match ModelKindName::parse(&cfg.model) {
        Some(m) => m,
        None => {
            errors.push(format!("unknown model {:?} (svm|logreg|ksvm|multisvm|blackbox)", cfg.model));
            ModelKindName::Svm
        }
    };
    let fairness = match FairnessKind::parse(&cfg.fairness) {
        Ok(k) => k,
        Err(_) => {
            errors.push(format!("unknown fairness {:?} (omr|fpr|eo|dp|f1)", cfg.fairness));
            FairnessKind::Omr
        }
    };
    if !cfg.t.is_finite() {
        errors.push("t must be finite".into());
    }
    match model {
        ModelKindName::Svm | ModelKindName::Ksvm | ModelKindName::Multisvm => {
            if !(cfg.t > 0.0) {
                errors.push("margin models need t > 0".into());
            }
        }
        ModelKindName::Blackbox => {
            if !(cfg.t > 0.0 && cfg.t <= 1.0) {
                errors.push("probability models need t in (0, 1]".into());
            }
            if !needs_blackbox {
                errors.push("model \"blackbox\" needs --blackbox <command>".into());
            }
        }
        ModelKindName::Logreg => {} // log-likelihood thresholds may be nonpositive
    }
    if model == ModelKindName::Multisvm && fairness != FairnessKind::Omr {
        errors.push("multiclass training supports fairness \"omr\" only".into());
    }
    if !(cfg.lambda >= 0.0) {
        errors.push("lambda must be >= 0".into());
    }
    if !(cfg.rho >= 0.0) {
        errors.push("rho must be >= 0".into());
    }
    if !(cfg.delta > 0.0) {
        errors.push("delta must be > 0".into());
    }
    if let Some(r) = cfg.split_ratio {
        if !(r > 0.0 && r < 1.0) {
            errors.push("split_ratio must be in (0, 1)".into());
        }
    }
    let max_iter = cfg.max_iter.unwrap_or(match model {
        ModelKindName::Blackbox => 4,
        _ => 50,
    });
    if max_iter == 0 {
        errors.push("max_iter must be positive".into());
    }
    if !cfg.dataset.exists() {
        errors.push(format!("dataset file {} not found", cfg.dataset.display()));
    }
    if !cfg.schema.exists() {
        errors.push(format!("schema file {} not found", cfg.schema.display()));
    }
    let seed = seed_override.or(cfg.seed).unwrap_or(0);
    let train = cfg.train.build(cfg.lambda, seed, &mut errors);
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    let hyper = HyperParams::new(cfg.t, cfg.lambda, cfg.rho).with_stopping(cfg.delta, max_iter.max(1));
    Ok(FitPlan { model, fairness, hyper, train, seed, split_ratio: cfg.split_ratio })
}

#[derive(Debug, Clone, Deserialize)]
pub struct GridConfig {
    pub dataset: PathBuf,
    pub schema: PathBuf,
    pub model: String,
    pub fairness: String,
    pub t: Vec<f64>,
    pub lambda: Vec<f64>,
    pub rho: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub folds: Option<usize>,
    #[serde(default)]
    pub split_ratio: Option<f64>,
    /// Warm start within each ascending-rho slice (default true).
    #[serde(default)]
    pub warm_start: Option<bool>,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SelectConfig {
    pub scores: PathBuf,
    pub fairness: String,
    pub t: f64,
    pub rho: f64,
    /// "at_most" (margins) or "at_least" (likelihoods/probabilities).
    #[serde(default)]
    pub direction: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExportConfig {
    pub dataset: PathBuf,
    pub schema: PathBuf,
    /// "gsvmf" | "gmsvmf" | "gsvm-f1".
    pub builder: String,
    #[serde(default)]
    pub fairness: Option<String>,
    pub t: f64,
    pub lambda: f64,
    pub rho: f64,
    #[serde(default)]
    pub mu_override: Option<f64>,
    #[serde(default)]
    pub lp_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct OracleCheckConfig {
    pub n: usize,
    pub seeds: Vec<u64>,
    /// "svm" | "logreg".
    pub model: String,
    pub fairness: String,
    pub t: f64,
    pub lambda: f64,
    pub rho: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub train: TrainSection,
}
