//! TOML configuration with validated ranges. Unknown keys are rejected;
//! environment variables override file values for backend credentials only.

use std::path::PathBuf;

use num_bigint::BigUint;
use serde::Deserialize;
use thiserror::Error;

use crate::frontend::TraverseConfig;
use crate::fusion::FusionConfig;
use crate::memory::MemoryConfig;
use crate::pipeline::PipelineConfig;
use crate::profitability::{SimConfig, SwapMode};
use crate::reachability::SolverConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("config value out of range: {0}")]
    OutOfRange(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Graph store path; created on first ingest.
    pub graph_store: Option<PathBuf>,
    pub embedding_dimension: usize,
    pub numeraire: String,
    /// Path globs for trusted libraries excluded from analysis.
    pub trusted_libs: Vec<String>,
    pub fusion: FusionSection,
    pub memory: MemorySection,
    pub solver: SolverSection,
    pub traversal: TraversalSection,
    pub simulation: SimulationSection,
    pub pipeline: PipelineSection,
    pub backend: BackendSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            graph_store: None,
            embedding_dimension: 256,
            numeraire: "WBNB".into(),
            trusted_libs: Vec::new(),
            fusion: FusionSection::default(),
            memory: MemorySection::default(),
            solver: SolverSection::default(),
            traversal: TraversalSection::default(),
            simulation: SimulationSection::default(),
            pipeline: PipelineSection::default(),
            backend: BackendSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionSection {
    /// Equivalence threshold for the deterministic judge.
    pub tau: f32,
    /// Candidates retrieved per node during ingestion.
    pub candidate_k: usize,
}

impl Default for FusionSection {
    fn default() -> Self {
        FusionSection {
            tau: 0.95,
            candidate_k: 5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemorySection {
    pub confidence_threshold: f64,
    pub hop_budget: usize,
    pub seed_k: usize,
    pub dense_k: usize,
}

impl Default for MemorySection {
    fn default() -> Self {
        let d = MemoryConfig::default();
        MemorySection {
            confidence_threshold: d.confidence_threshold,
            hop_budget: d.hop_budget,
            seed_k: d.seed_k,
            dense_k: d.dense_k,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// Inclusive upper bound for numeric symbols; unbounded when absent.
    pub domain_max: Option<u64>,
    pub search_node_cap: u64,
    pub nonlinear_max_symbols: usize,
    pub nonlinear_max_space: u64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            domain_max: None,
            search_node_cap: d.search_node_cap,
            nonlinear_max_symbols: d.nonlinear_max_symbols,
            nonlinear_max_space: d.nonlinear_max_space,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraversalSection {
    pub depth_limit: usize,
    pub max_paths: usize,
}

impl Default for TraversalSection {
    fn default() -> Self {
        let d = TraverseConfig::default();
        TraversalSection {
            depth_limit: d.depth_limit,
            max_paths: d.max_paths,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    /// Default pool fee factor in parts per million when a pool omits it.
    pub gamma_default_ppm: u32,
    /// `amm` (constant product) or `idealized` (spot execution).
    pub mode: String,
    pub flash_fee_ppm: u32,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            gamma_default_ppm: 997_000,
            mode: "amm".into(),
            flash_fee_ppm: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSection {
    pub iteration_cap: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection { iteration_cap: 5 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendSection {
    pub url: Option<String>,
    pub model: String,
    pub temperature: f64,
    /// Environment variable holding the bearer credential; never stored in
    /// the file itself.
    pub credential_env: String,
    pub timeout_secs: u64,
    pub transport_retries: u32,
    pub max_in_flight: usize,
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            url: None,
            model: "default".into(),
            temperature: 0.2,
            credential_env: "EVOPOC_BACKEND_CREDENTIAL".into(),
            timeout_secs: 30,
            transport_retries: 2,
            max_in_flight: 4,
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Config, ConfigError> {
        let config: Config =
            toml::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Config, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        Config::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.embedding_dimension == 0 || self.embedding_dimension > 65_536 {
            return Err(ConfigError::OutOfRange("embedding_dimension".into()));
        }
        if !(0.0..=1.0).contains(&self.fusion.tau) {
            return Err(ConfigError::OutOfRange("fusion.tau".into()));
        }
        if self.fusion.candidate_k == 0 {
            return Err(ConfigError::OutOfRange("fusion.candidate_k".into()));
        }
        if !(0.0..=1.0).contains(&self.memory.confidence_threshold) {
            return Err(ConfigError::OutOfRange("memory.confidence_threshold".into()));
        }
        if self.memory.hop_budget == 0 || self.memory.seed_k == 0 || self.memory.dense_k == 0 {
            return Err(ConfigError::OutOfRange("memory budgets must be positive".into()));
        }
        if self.traversal.depth_limit == 0 || self.traversal.max_paths == 0 {
            return Err(ConfigError::OutOfRange("traversal limits must be positive".into()));
        }
        if self.simulation.gamma_default_ppm == 0 || self.simulation.gamma_default_ppm > 1_000_000
        {
            return Err(ConfigError::OutOfRange(
                "simulation.gamma_default_ppm must be in 1..=1000000".into(),
            ));
        }
        if !matches!(self.simulation.mode.as_str(), "amm" | "idealized") {
            return Err(ConfigError::OutOfRange("simulation.mode".into()));
        }
        if self.pipeline.iteration_cap == 0 || self.pipeline.iteration_cap > 100 {
            return Err(ConfigError::OutOfRange("pipeline.iteration_cap".into()));
        }
        if !(0.0..=2.0).contains(&self.backend.temperature) {
            return Err(ConfigError::OutOfRange("backend.temperature".into()));
        }
        Ok(())
    }

    pub fn fusion_config(&self) -> FusionConfig {
        FusionConfig {
            candidate_k: self.fusion.candidate_k,
        }
    }

    pub fn memory_config(&self) -> MemoryConfig {
        MemoryConfig {
            seed_k: self.memory.seed_k,
            confidence_threshold: self.memory.confidence_threshold,
            hop_budget: self.memory.hop_budget,
            dense_k: self.memory.dense_k,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            domain_max: self.solver.domain_max.map(BigUint::from),
            search_node_cap: self.solver.search_node_cap,
            nonlinear_max_symbols: self.solver.nonlinear_max_symbols,
            nonlinear_max_space: self.solver.nonlinear_max_space,
        }
    }

    pub fn traverse_config(&self) -> TraverseConfig {
        TraverseConfig {
            depth_limit: self.traversal.depth_limit,
            max_paths: self.traversal.max_paths,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            mode: if self.simulation.mode == "idealized" {
                SwapMode::Idealized
            } else {
                SwapMode::Amm
            },
            flash_fee_ppm: self.simulation.flash_fee_ppm,
        }
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            iteration_cap: self.pipeline.iteration_cap,
            traverse: self.traverse_config(),
            solver: self.solver_config(),
            sim: self.sim_config(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass_validation() {
        Config::default().validate().unwrap();
        let config = Config::from_toml_str("").unwrap();
        assert_eq!(config.pipeline.iteration_cap, 5);
        assert_eq!(config.memory.confidence_threshold, 0.5);
        assert_eq!(config.simulation.gamma_default_ppm, 997_000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::from_toml_str("unknown_key = 1").unwrap_err();
        assert!(matches!(err, ConfigError::Malformed(_)));
        let err = Config::from_toml_str("[fusion]\nmystery = 2").unwrap_err();
        assert!(matches!(err, ConfigError::Malformed(_)));
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        let err = Config::from_toml_str("[fusion]\ntau = 1.5").unwrap_err();
        assert!(matches!(err, ConfigError::OutOfRange(_)));
        let err = Config::from_toml_str("[pipeline]\niteration_cap = 0").unwrap_err();
        assert!(matches!(err, ConfigError::OutOfRange(_)));
        let err = Config::from_toml_str("[simulation]\nmode = \"optimistic\"").unwrap_err();
        assert!(matches!(err, ConfigError::OutOfRange(_)));
    }

    #[test]
    fn sections_parse() {
        let text = r#"
            embedding_dimension = 128
            numeraire = "WETH"
            [solver]
            domain_max = 15
            [simulation]
            mode = "idealized"
        "#;
        let config = Config::from_toml_str(text).unwrap();
        assert_eq!(config.embedding_dimension, 128);
        assert_eq!(config.numeraire, "WETH");
        assert_eq!(config.solver.domain_max, Some(15));
        assert!(matches!(config.sim_config().mode, SwapMode::Idealized));
    }
}
