//! Merging of flag values with an optional JSON config file.

use std::fs;
use std::path::{Path, PathBuf};

use fcir::{FbmBackend, HurstParameter, SimConfig, TimeGrid};
use serde::Deserialize;

use crate::output::CliError;

pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_DT: f64 = 0.001;
pub const DEFAULT_PATHS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_X0: f64 = 1.0;

/// Config file contents. Keys match the long flag names; snake_case
/// spellings are accepted as well.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub a: Option<f64>,
    pub k: Option<f64>,
    pub sigma: Option<f64>,
    pub hurst: Option<f64>,
    pub x0: Option<f64>,
    #[serde(alias = "t_end")]
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    #[serde(alias = "fbm_backend")]
    pub fbm_backend: Option<String>,
    pub workers: Option<usize>,
    pub label: Option<String>,
    pub out: Option<PathBuf>,
    #[serde(alias = "out_dir")]
    pub out_dir: Option<PathBuf>,
    #[serde(alias = "dump_paths")]
    pub dump_paths: Option<u64>,
    pub ks: Option<Vec<f64>>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub dts: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }

    /// Copies every value present in `flags` over `self`.
    pub fn overridden_by(mut self, flags: FileConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if flags.$f.is_some() { self.$f = flags.$f; } )* };
        }
        take! {
            a, k, sigma, hurst, x0, t_end, dt, paths, seed, fbm_backend, workers, label, out, out_dir, dump_paths,
            ks, k1, k2, dts
        }
        self
    }

    pub fn require(&self, value: Option<f64>, flag: &str) -> Result<f64, CliError> {
        value.ok_or_else(|| CliError::validation(format!("--{flag} is required (flag or config file)")))
    }

    pub fn paths(&self) -> Result<u64, CliError> {
        match self.paths.unwrap_or(DEFAULT_PATHS) {
            0 => Err(CliError::validation("--paths must be at least 1")),
            n => Ok(n),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn backend(&self) -> Result<FbmBackend, CliError> {
        match &self.fbm_backend {
            Some(s) => Ok(s.parse()?),
            None => Ok(FbmBackend::default()),
        }
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::from_step(self.t_end.unwrap_or(DEFAULT_T_END), self.dt.unwrap_or(DEFAULT_DT))?)
    }

    pub fn hurst(&self) -> Result<HurstParameter, CliError> {
        Ok(HurstParameter::new(self.require(self.hurst, "hurst")?)?)
    }

    /// Model configuration with drift numerator `k`.
    pub fn sim_config(&self, k: f64) -> Result<SimConfig, CliError> {
        let hurst = self.hurst()?;
        let a = self.require(self.a, "a")?;
        let sigma = self.require(self.sigma, "sigma")?;
        Ok(SimConfig::from_x0(a, k, sigma, hurst, self.x0.unwrap_or(DEFAULT_X0), self.grid()?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = serde_json::from_str(r#"{"a": 2, "k": 1, "t-end": 5, "dt": 0.01}"#).unwrap();
        let flags = FileConfig { a: Some(1.0), ..Default::default() };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.a, Some(1.0));
        assert_eq!(merged.k, Some(1.0));
        assert_eq!(merged.grid().unwrap().n_steps(), 500);
    }

    #[test]
    fn snake_case_aliases() {
        let file: FileConfig = serde_json::from_str(r#"{"t_end": 2, "fbm_backend": "reference"}"#).unwrap();
        assert_eq!(file.t_end, Some(2.0));
        assert_eq!(file.backend().unwrap(), FbmBackend::Reference);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"hurts": 0.5}"#).is_err());
    }

    #[test]
    fn defaults_and_requirements() {
        let c = FileConfig::default();
        assert_eq!(c.paths().unwrap(), DEFAULT_PATHS);
        assert_eq!(c.grid().unwrap().n_steps(), 10_000);
        let err = c.sim_config(1.0).unwrap_err();
        assert!(err.to_string().contains("--hurst"), "{err}");
        let zero = FileConfig { paths: Some(0), ..Default::default() };
        assert!(zero.paths().is_err());
    }
}
