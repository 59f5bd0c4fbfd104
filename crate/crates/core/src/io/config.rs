use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "ANELKIN_CONFIG";

/// Tolerances and limits shared by every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Relative tolerance for holonomy, gradient and equivalence verdicts.
    pub tol_rel: f64,
    /// Largest accepted reconstruction residual of a decomposition.
    pub tol_decomp: f64,
    pub closure_bound: usize,
    /// Seed for synthetic data; recorded in every report.
    pub rng_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol_rel: 1e-9,
            tol_decomp: 1e-12,
            closure_bound: 100_000,
            rng_seed: 42,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Loads the explicit path, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);
        match explicit.map(Path::to_path_buf).or(from_env) {
            Some(path) => Self::load(&path),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tol_rel", self.tol_rel), ("tol_decomp", self.tol_decomp)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.closure_bound == 0 {
            return Err(Error::Config("closure_bound must be positive".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain struct serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_files() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
        let c = RunConfig::from_toml("tol_rel = 1e-6\nrng_seed = 7\n").unwrap();
        assert_eq!((c.tol_rel, c.rng_seed, c.tol_decomp), (1e-6, 7, 1e-12));
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn invalid_files() {
        assert!(RunConfig::from_toml("tol_rel = -1.0").is_err());
        assert!(RunConfig::from_toml("tol_typo = 1.0").is_err());
        assert!(RunConfig::from_toml("closure_bound = 0").is_err());
    }
}
