use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::discretize::BinSpec;
use crate::error::{Error, Result};

/// Which classifications observations hang off when the chain is learned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attach {
    #[default]
    All,
    Leaves,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub root: Option<String>,
    pub attach: Attach,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    /// Dependency edges `(parent, child)`.
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub ratio: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ratio: 0.75,
            seed: 0,
        }
    }
}

/// Training configuration, read from TOML or JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnConfig {
    /// Laplace smoothing coefficient.
    pub alpha: f64,
    /// Smooth priors as well as conditionals.
    pub smooth_priors: bool,
    /// Fixed prior tuples, overriding counted priors.
    pub priors: BTreeMap<String, Vec<f64>>,
    pub bins: BTreeMap<String, BinSpec>,
    pub classes: Vec<String>,
    pub domains: BTreeMap<String, Vec<String>>,
    pub chain: ChainConfig,
    pub structure: Option<StructureConfig>,
    pub split: SplitConfig,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            alpha: 1.0,
            smooth_priors: true,
            priors: BTreeMap::new(),
            bins: BTreeMap::new(),
            classes: Vec::new(),
            domains: BTreeMap::new(),
            chain: ChainConfig::default(),
            structure: None,
            split: SplitConfig::default(),
        }
    }
}

impl LearnConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: LearnConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: LearnConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be a finite non-negative number, got {}",
                self.alpha
            )));
        }
        for (name, beta) in &self.priors {
            if beta.iter().any(|p| !(0.0..=1.0).contains(p))
                || (beta.iter().sum::<f64>() - 1.0).abs() > crate::model::NORMALISATION_TOLERANCE
            {
                return Err(Error::InvalidConfig(format!(
                    "priors for `{name}` must lie in [0, 1] and sum to 1: {beta:?}"
                )));
            }
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "split ratio must lie strictly between 0 and 1, got {}",
                self.split.ratio
            )));
        }
        Ok(())
    }

    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            alpha: self.alpha,
            priors: self.priors.clone(),
            smooth_priors: self.smooth_priors,
        }
    }
}

/// Counting parameters shared by every fit.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    pub priors: BTreeMap<String, Vec<f64>>,
    pub smooth_priors: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 1.0,
            priors: BTreeMap::new(),
            smooth_priors: true,
        }
    }
}

impl Hyperparams {
    pub fn with_alpha(alpha: f64) -> Self {
        Hyperparams {
            alpha,
            ..Self::default()
        }
    }
}
