use std::path::{Path, PathBuf};

use kreglib_core::library::{PipelineParams, SubsampleParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest vertex count a run may request.
pub const MAX_N: usize = 200;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("batch_cap ({batch_cap}) exceeds per_bin_target ({target})")]
    CapAboveTarget { batch_cap: usize, target: usize },
    #[error("p_threshold must lie in (0, 1], got {0}")]
    Threshold(f64),
    #[error("max_draws ({max}) is below draws ({draws})")]
    DrawCap { draws: usize, max: usize },
    #[error("no connected simple {k}-regular graph on {n} vertices")]
    Infeasible { n: usize, k: usize },
    #[error("n = {0} exceeds the supported maximum of {MAX_N}")]
    TooLarge(usize),
    #[error("degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("reading config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
}

/// Every parameter of a library build; echoed verbatim into `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Vec<usize>,
    pub k: usize,
    pub per_bin_target: usize,
    pub batch_cap: usize,
    pub abort_limit: usize,
    pub batch_size: usize,
    pub draws: usize,
    pub max_draws: usize,
    pub p_threshold: f64,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(default)]
    pub wm_draws: Option<usize>,
    #[serde(default)]
    pub cc_runs: Option<usize>,
    pub null_draws: usize,
    pub pairing_attempts: usize,
    pub census_limit: f64,
    pub census_window: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineParams::default();
        Self {
            n: Vec::new(),
            k: p.k,
            per_bin_target: p.per_bin_target,
            batch_cap: p.batch_cap,
            abort_limit: p.abort_limit,
            batch_size: p.subsample.batch_size,
            draws: p.subsample.draws,
            max_draws: p.subsample.max_draws,
            p_threshold: p.subsample.p_threshold,
            seed: 0,
            out: PathBuf::from("library"),
            wm_draws: p.wm_draws,
            cc_runs: p.cc_runs,
            null_draws: p.null_draws,
            pairing_attempts: p.pairing_attempts,
            census_limit: p.census_limit,
            census_window: p.census_window,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config is serialisable");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("per_bin_target", self.per_bin_target),
            ("batch_cap", self.batch_cap),
            ("abort_limit", self.abort_limit),
            ("batch_size", self.batch_size),
            ("draws", self.draws),
            ("max_draws", self.max_draws),
            ("null_draws", self.null_draws),
            ("pairing_attempts", self.pairing_attempts),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(ConfigError::NotPositive(name));
        }
        if self.census_window == 0 {
            return Err(ConfigError::NotPositive("census_window"));
        }
        if self.batch_cap > self.per_bin_target {
            return Err(ConfigError::CapAboveTarget { batch_cap: self.batch_cap, target: self.per_bin_target });
        }
        if !(self.p_threshold > 0.0 && self.p_threshold <= 1.0) {
            return Err(ConfigError::Threshold(self.p_threshold));
        }
        if self.max_draws < self.draws {
            return Err(ConfigError::DrawCap { draws: self.draws, max: self.max_draws });
        }
        if self.k < 2 {
            return Err(ConfigError::DegreeTooSmall(self.k));
        }
        for &n in &self.n {
            if n > MAX_N {
                return Err(ConfigError::TooLarge(n));
            }
            if n <= self.k || (n * self.k) % 2 == 1 {
                return Err(ConfigError::Infeasible { n, k: self.k });
            }
        }
        Ok(())
    }

    pub fn params(&self) -> PipelineParams {
        PipelineParams {
            k: self.k,
            per_bin_target: self.per_bin_target,
            batch_cap: self.batch_cap,
            abort_limit: self.abort_limit,
            wm_draws: self.wm_draws,
            cc_runs: self.cc_runs,
            pairing_attempts: self.pairing_attempts,
            subsample: SubsampleParams {
                batch_size: self.batch_size,
                draws: self.draws,
                max_draws: self.max_draws,
                p_threshold: self.p_threshold,
            },
            null_draws: self.null_draws,
            census_limit: self.census_limit,
            census_window: self.census_window,
        }
    }

    /// Whether raw samples generated under `other` can be reused here.
    pub(crate) fn same_generation(&self, other: &RunConfig) -> bool {
        let strip = |c: &RunConfig| RunConfig { n: Vec::new(), out: PathBuf::new(), ..c.clone() };
        let (a, b) = (strip(self).params(), strip(other).params());
        let gen = |p: PipelineParams| PipelineParams { subsample: SubsampleParams::default(), null_draws: 0, ..p };
        gen(a) == gen(b) && self.seed == other.seed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig { n: vec![10, 15], seed: 7, wm_draws: Some(3), ..RunConfig::default() };
        let back: RunConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |f: fn(&mut RunConfig)| {
            let mut c = RunConfig { n: vec![10], ..RunConfig::default() };
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.batch_cap = 0));
        assert!(bad(|c| c.batch_cap = 2000));
        assert!(bad(|c| c.p_threshold = 1.5));
        assert!(bad(|c| c.n = vec![4]));
        assert!(bad(|c| c.n = vec![202]));
        assert!(!bad(|c| c.n = vec![70]));
        assert!(bad(|c| {
            c.k = 3;
            c.n = vec![11]
        }));
        assert!(!bad(|_| ()));
    }

    #[test]
    fn generation_identity_ignores_subsampling() {
        let a = RunConfig { n: vec![10], ..RunConfig::default() };
        let b = RunConfig { n: vec![15], draws: 5, out: "x".into(), ..a.clone() };
        assert!(a.same_generation(&b));
        assert!(!a.same_generation(&RunConfig { seed: 1, ..a.clone() }));
        assert!(!a.same_generation(&RunConfig { batch_cap: 5, ..a.clone() }));
    }
}
