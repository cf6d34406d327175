//! Declarative pipeline configuration.
//!
//! One TOML file drives every stage: the root seed, worker count, vocab
//! and model paths, per-source inputs, and per-stage parameter sections.
//! Validation runs before any work starts and reports the offending path
//! or field, so a bad config never produces partial output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use corpusprep::corpus::Source;
use corpusprep::denoise::MixtureWeights;
use corpusprep::linefilter::FilterConfig;
use corpusprep::mixture::MixtureSpec;
use corpusprep::ngram::Smoothing;
use serde::{Deserialize, Serialize};

/// A configuration or command-line problem caught before running.
///
/// Distinct from stage failures so the process can exit with the
/// validation status code.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ValidationError {}

/// Full pipeline configuration, deserialized from TOML.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed for every stochastic stage.
    pub seed: Option<u64>,
    /// Worker threads for per-record stages.
    pub workers: Option<usize>,
    /// Unigram vocabulary file; the built-in vocabulary when absent.
    pub vocab: Option<PathBuf>,
    /// Pre-trained ARPA model for document scoring.
    pub lm: Option<PathBuf>,
    /// Directory for stage outputs and the run manifest.
    pub out_dir: Option<PathBuf>,
    /// Raw per-source input corpora.
    pub inputs: BTreeMap<Source, PathBuf>,
    /// Line filter thresholds.
    pub filter: FilterConfig,
    /// Source weights, train fractions, and the validation token floor.
    pub mixture: MixtureSpec,
    /// Denoising example synthesis parameters.
    pub denoise: DenoiseSection,
    /// Language model training parameters.
    pub lm_train: LmSection,
    /// Score-based filtering percentiles.
    pub score: ScoreSection,
    /// End-to-end run parameters.
    pub prepare: PrepareSection,
}

/// Denoising parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseSection {
    /// Input and target token budget.
    pub seq_len: usize,
    /// Whether inputs start with the mode token.
    pub prefix_mode_token: bool,
    /// Denoising family weights.
    pub weights: MixtureWeights,
}

impl Default for DenoiseSection {
    fn default() -> Self {
        DenoiseSection {
            seq_len: corpusprep::denoise::DEFAULT_SEQ_LEN,
            prefix_mode_token: true,
            weights: MixtureWeights::default(),
        }
    }
}

/// N-gram model training parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmSection {
    /// Model order.
    pub order: usize,
    /// Smoothing method.
    pub smoothing: Smoothing,
}

impl Default for LmSection {
    fn default() -> Self {
        LmSection { order: 5, smoothing: Smoothing::KneserNey }
    }
}

/// Percentile cutoffs for language model score filtering.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreSection {
    /// Journal-article percentile: documents below it are dropped.
    pub dergipark_pct: f64,
    /// Thesis percentile: documents below it are dropped.
    pub yoktez_pct: f64,
}

impl Default for ScoreSection {
    fn default() -> Self {
        ScoreSection { dergipark_pct: 5.0, yoktez_pct: 2.0 }
    }
}

/// End-to-end run parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepareSection {
    /// Mixture examples drawn before denoising.
    pub examples: usize,
}

impl Default for PrepareSection {
    fn default() -> Self {
        PrepareSection { examples: 512 }
    }
}

impl PipelineConfig {
    /// Parse a TOML config file.
    pub fn load(path: &Path) -> Result<PipelineConfig, ValidationError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| ValidationError(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&raw)
            .map_err(|e| ValidationError(format!("cannot parse {}: {e}", path.display())))
    }

    /// Check paths and per-section invariants. Stages call this before
    /// touching any input.
    pub fn validate(&self) -> Result<(), ValidationError> {
        for (name, path) in [("vocab", &self.vocab), ("lm", &self.lm)] {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(ValidationError(format!(
                        "{name} file not found: {}",
                        path.display()
                    )));
                }
            }
        }
        for (source, path) in &self.inputs {
            if !path.is_file() {
                return Err(ValidationError(format!(
                    "input for {source} not found: {}",
                    path.display()
                )));
            }
        }
        self.filter
            .validate()
            .map_err(|e| ValidationError(e.to_string()))?;
        self.mixture
            .validate()
            .map_err(|e| ValidationError(e.to_string()))?;
        self.denoise
            .weights
            .validate()
            .map_err(|e| ValidationError(e.to_string()))?;
        if self.lm_train.order == 0 {
            return Err(ValidationError("lm_train.order must be at least 1".to_string()));
        }
        for pct in [self.score.dergipark_pct, self.score.yoktez_pct] {
            if !(pct > 0.0 && pct < 100.0) {
                return Err(ValidationError(
                    "score percentiles must lie strictly between 0 and 100".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Output directory, defaulting to `out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// The seed, as required by stochastic stages.
    pub fn require_seed(&self) -> Result<u64, ValidationError> {
        self.seed.ok_or_else(|| {
            ValidationError(
                "a seed is required (set `seed` in the config or pass --seed)".to_string(),
            )
        })
    }
}
