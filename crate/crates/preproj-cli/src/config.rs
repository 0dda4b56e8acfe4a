use std::path::Path;

use preproj::convolution::ConvBudget;
use preproj::generic_ops::GenericityPolicy;
use preproj::{CartanConfig, Error, Result};
use serde::Deserialize;

/// Contents of a `--config` TOML file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cartan: Option<CartanConfig>,
    #[serde(default)]
    pub policy: GenericityPolicy,
    #[serde(default)]
    pub budget: ConvBudget,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.policy.validate()?;
        if cfg.budget.primes.iter().any(|&p| p < 5 || !preproj::field::is_probable_prime(p)) {
            return Err(Error::Input("budget.primes must be primes ≥ 5".into()));
        }
        if let Some(c) = &cfg.cartan {
            c.to_datum()?;
        }
        Ok(cfg)
    }

    pub fn empty() -> Self {
        RunConfig { cartan: None, policy: GenericityPolicy::default(), budget: ConvBudget::default() }
    }
}
