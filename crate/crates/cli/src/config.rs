//! Run configuration: a JSON file whose fields any command-line flag
//! overrides.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use optdesign::criteria::CriterionKind;
use optdesign::model::load_model;
use optdesign::{enumerate_candidates, CriterionConfig, DesignSpace, SearchConfig};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Options shared by every subcommand. Each is optional so that values from
/// `--config` survive unless overridden.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Built-in model (M1..M4) or path to a JSON model file.
    #[arg(long)]
    pub model: Option<String>,
    /// D, A, DP, AP, C1, C2, or C (compound, needs --kappa).
    #[arg(long)]
    pub criterion: Option<String>,
    /// Significance level of the F quantiles in DP and AP.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Compound weights on DP, AP and DF efficiency.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub kappa: Option<Vec<f64>>,
    /// Number of runs.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_passes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Probability that a run goes missing, for the breakdown probability.
    #[arg(long)]
    pub p_missing: Option<f64>,
    /// Monte Carlo draws for the breakdown probability.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Design file (.csv or .json).
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Output directory; results go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Options {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` with every field set in `flags` replaced.
    pub fn merged(mut self, flags: &Options) -> Self {
        overlay!(self, flags, model, criterion, alpha, kappa, n, restarts, max_passes, seed, p_missing, reps, design, out, format);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn model_arg(&self) -> &str {
        self.model.as_deref().unwrap_or("M1")
    }

    /// Candidate set and model.
    pub fn space(&self) -> Result<DesignSpace, CliError> {
        let (factors, model) = load_model(self.model_arg())?;
        Ok(DesignSpace::new(enumerate_candidates(&factors), model)?)
    }

    pub fn criterion_config(&self) -> Result<CriterionConfig, CliError> {
        let name = self.criterion.as_deref().unwrap_or("D");
        self.criterion_named(name)
    }

    /// Criterion `name` with the shared alpha and kappa settings applied.
    pub fn criterion_named(&self, name: &str) -> Result<CriterionConfig, CliError> {
        let mut cfg: CriterionConfig = name.parse()?;
        if let Some(alpha) = self.alpha {
            cfg.alpha = alpha;
        }
        if let Some(k) = &self.kappa {
            if k.len() != 3 {
                return Err(CliError::Config(format!("kappa needs 3 weights, got {}", k.len())));
            }
            if cfg.kind != CriterionKind::Compound {
                return Err(CliError::Config(format!(
                    "--kappa applies to compound criteria, not {name}"
                )));
            }
            // explicit weights replace the C1/C2 presets, and their label
            cfg.kappa = Some([k[0], k[1], k[2]]);
            cfg.label = None;
        }
        Ok(cfg)
    }

    pub fn search_config(&self, default_n: usize) -> SearchConfig {
        let mut s = SearchConfig::new(self.n.unwrap_or(default_n), self.seed());
        if let Some(r) = self.restarts {
            s.restarts = r;
        }
        if let Some(m) = self.max_passes {
            s.max_passes = m;
        }
        s
    }

    /// SHA-256 over the effective configuration of a command.
    pub fn hash(&self, command: &str) -> String {
        let effective = Options {
            out: None,
            ..self.clone()
        };
        let doc = serde_json::json!({ "command": command, "options": effective });
        let digest = Sha256::digest(doc.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
