//! Experiment harness: configuration, the run commands and their CSV/JSON
//! artifacts, and a seeded builder for synthetic test networks.

mod commands;
pub mod fixtures;
mod output;

pub use commands::{
    cmd_compare, cmd_fit_wind, cost_gap, cmd_make_fixtures, cmd_rescale_wind, cmd_run_dp, cmd_run_sddp, cmd_scale, discretize_for,
    CompareRow, DpReport, ScaleRow, SddpReport,
};
pub use output::{DpSummary, SddpSummary, BOUNDS_HEADER, COMPARE_HEADER, SCALE_HEADER};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dp::{DpError, Interpolation};
use crate::network::{parse_case, Network, NetworkError};
use crate::sddp::{SddpConfig, SddpError, StopRule};
use crate::stage::DEFAULT_BREAKPOINTS;
use crate::wind::{WindError, WindModel};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Wind(#[from] WindError),
    #[error(transparent)]
    Sddp(#[from] SddpError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl BenchError {
    pub fn kind(&self) -> &'static str {
        match self {
            BenchError::Config(_) => "config",
            BenchError::Network(_) => "network",
            BenchError::Wind(_) => "wind",
            BenchError::Sddp(_) => "sddp",
            BenchError::Dp(_) => "dp",
            BenchError::Io(_) => "io",
        }
    }

    /// One-line machine-readable form, `{"error": kind, "message": text}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

/// Everything a harness command needs. Missing fields take the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: PathBuf,
    pub wind: PathBuf,
    /// Truncates the case to its first `horizon` periods.
    pub horizon: Option<usize>,
    pub iterations: usize,
    pub backward_samples: usize,
    pub scenarios: usize,
    pub forward_samples: usize,
    pub alpha: f64,
    pub stop_rule: StopRule,
    pub breakpoints: usize,
    /// Storage, generation and wind level counts.
    pub dp_grid: [usize; 3],
    pub dp_interpolation: Interpolation,
    /// Simulated transitions used to estimate the wind chain.
    pub wind_samples: usize,
    /// Scenarios per policy simulation.
    pub simulations: usize,
    /// SDDP iteration count of each comparison run.
    pub compare_runs: Vec<usize>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    /// Scaling cases: ladder bus counts such as `"30"`, or case file paths.
    pub cases: Vec<String>,
    pub storage_counts: Vec<usize>,
    pub wind_counts: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            case: PathBuf::new(),
            wind: PathBuf::new(),
            horizon: None,
            iterations: 10,
            backward_samples: 25,
            scenarios: 25,
            forward_samples: 25,
            alpha: 0.05,
            stop_rule: StopRule::Fixed,
            breakpoints: DEFAULT_BREAKPOINTS,
            dp_grid: [6, 6, 7],
            dp_interpolation: Interpolation::Convex,
            wind_samples: 20_000,
            simulations: 100,
            compare_runs: vec![4, 10],
            seed: 0,
            threads: None,
            out: PathBuf::from("out"),
            cases: Vec::new(),
            storage_counts: vec![1, 5],
            wind_counts: vec![1, 5],
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Checks counts and parameters without touching the file system.
    pub fn check_params(&self) -> Result<(), BenchError> {
        let counts = [
            ("iterations", self.iterations),
            ("backward samples", self.backward_samples),
            ("scenarios", self.scenarios),
            ("forward samples", self.forward_samples),
            ("breakpoints", self.breakpoints),
            ("wind samples", self.wind_samples),
            ("simulations", self.simulations),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(BenchError::Config(format!("{name} must be at least 1")));
            }
        }
        if self.breakpoints < 2 {
            return Err(BenchError::Config("breakpoints must be at least 2".into()));
        }
        if self.dp_grid.contains(&0) {
            return Err(BenchError::Config("dp grid counts must be at least 1".into()));
        }
        if self.horizon == Some(0) {
            return Err(BenchError::Config("horizon must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(BenchError::Config("alpha must lie in (0, 1)".into()));
        }
        if self.compare_runs.contains(&0) {
            return Err(BenchError::Config("comparison runs need at least 1 iteration".into()));
        }
        Ok(())
    }

    /// [`check_params`](Self::check_params) plus existence of the case and
    /// wind files.
    pub fn validate(&self) -> Result<(), BenchError> {
        self.check_params()?;
        for (what, p) in [("case", &self.case), ("wind model", &self.wind)] {
            if !p.is_file() {
                return Err(BenchError::Config(format!("{what} file {} not found", p.display())));
            }
        }
        Ok(())
    }

    /// Loads the case, applies the horizon and loads the wind model.
    pub fn load_inputs(&self) -> Result<(Network, WindModel), BenchError> {
        self.validate()?;
        let mut net = parse_case(&self.case)?;
        if let Some(t) = self.horizon {
            net = net.with_horizon(t)?;
        }
        let model = WindModel::load(&self.wind)?;
        if model.farms() != net.wind_farms.len() {
            return Err(BenchError::Config(format!(
                "wind model has {} farms, case has {}",
                model.farms(),
                net.wind_farms.len()
            )));
        }
        Ok((net, model))
    }

    pub fn sddp_config(&self) -> SddpConfig {
        SddpConfig {
            backward_samples: self.backward_samples,
            scenarios: self.scenarios,
            forward_samples: self.forward_samples,
            max_iters: self.iterations,
            alpha: self.alpha,
            stop_rule: self.stop_rule,
            seed: self.seed,
            breakpoints: self.breakpoints,
            ..SddpConfig::default()
        }
    }

    /// Applies `threads` to the global rayon pool. Later calls keep the
    /// first pool.
    pub fn install_threads(&self) {
        if let Some(n) = self.threads {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!((c.backward_samples, c.scenarios, c.forward_samples), (25, 25, 25));
        assert_eq!(c.dp_grid, [6, 6, 7]);
        c.check_params().unwrap();
    }

    #[test]
    fn toml_overrides_and_rejects() {
        let c = ExperimentConfig::from_toml("iterations = 4\nstop_rule = \"ci\"\ndp_grid = [2, 3, 4]\n").unwrap();
        assert_eq!((c.iterations, c.stop_rule, c.dp_grid), (4, StopRule::Ci, [2, 3, 4]));
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let bad = ExperimentConfig { forward_samples: 0, ..ExperimentConfig::default() };
        assert!(matches!(bad.check_params(), Err(BenchError::Config(_))));
    }

    #[test]
    fn missing_files_are_config_errors() {
        let c = ExperimentConfig { case: "/nonexistent.toml".into(), ..ExperimentConfig::default() };
        let e = c.validate().unwrap_err();
        assert_eq!(e.kind(), "config");
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"], "config");
    }
}
