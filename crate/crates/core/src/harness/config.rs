//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub res_min: u32,
    pub res_max: u32,
    pub seed: u64,
    /// Random instances per resolution.
    pub trials: u32,
    /// Exponents for the `L^p` ratios of the norm experiment.
    pub p: Vec<f64>,
    /// Exact arithmetic where the experiment supports both.
    pub exact: bool,
    /// Corrupt one wave packet so that the suite must fail.
    pub fault_injection: bool,
    /// `K` of the Fefferman trick.
    pub k_param: f64,
    /// Starting frequencies of the convergence experiment; empty means
    /// all powers of two below `2^res`.
    pub n0: Vec<u64>,
    pub eps: Vec<f64>,
    /// Function for the convergence experiment: `indicator(a,b)`,
    /// `walsh(n)` or `file(path)`.
    pub source: String,
    pub max_iterations: u32,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            res_min: 3,
            res_max: 3,
            seed: 1,
            trials: 3,
            p: vec![2.0],
            exact: true,
            fault_injection: false,
            k_param: 1.0,
            n0: Vec::new(),
            eps: vec![0.1],
            source: "indicator(0,1/3)".into(),
            max_iterations: 20_000,
            tolerance: 1e-9,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.res_min > self.res_max {
            return Err(Error::Config(format!("res_min {} > res_max {}", self.res_min, self.res_max)));
        }
        if self.res_max > 16 {
            return Err(Error::Config(format!("res_max {} exceeds 16", self.res_max)));
        }
        if let Some(p) = self.p.iter().find(|p| !(**p >= 1.0)) {
            return Err(Error::Config(format!("exponent {p} is below 1")));
        }
        if !(self.k_param > 0.0 && self.k_param.is_finite()) {
            return Err(Error::Config(format!("k_param {} must be positive", self.k_param)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn resolutions(&self) -> impl Iterator<Item = u32> {
        self.res_min..=self.res_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = ExperimentConfig::from_json_str(r#"{"res_min": 2, "res_max": 4, "seed": 9}"#).unwrap();
        assert_eq!((cfg.res_min, cfg.res_max, cfg.seed, cfg.trials), (2, 4, 9, 3));
        let back = ExperimentConfig::from_json_str(&cfg.to_json_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            r#"{"res_min": 5, "res_max": 4}"#,
            r#"{"p": [0.5]}"#,
            r#"{"k_param": 0}"#,
            r#"{"unknown": 1}"#,
            "not json",
        ] {
            assert!(ExperimentConfig::from_json_str(bad).is_err(), "{bad}");
        }
    }
}
