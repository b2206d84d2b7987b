//! Pipeline driver for spinbeat: builds or loads a bath realization, runs
//! the cluster correlation expansion, analyzes the normalized correlation in
//! time and frequency, and writes every product with a hashed manifest.

pub mod config;
mod manifest;
mod pipeline;

pub use config::{
    parse_analysis_config, parse_config, AnalysisConfig, AxisSpec, BathSource, Reference, RunConfig,
};
pub use manifest::{verify_products, Derived, Product, RunManifest, Timing};
pub use pipeline::{
    analyze, analyze_file, compare_orders, generate_bath, load_bath, run_pipeline, simulate,
    simulate_series, sweep_hf_axis, Analysis, BandTrace, DeviationReport, OrderDeviation,
};

use thiserror::Error;

#[derive(Debug, Error)]
#[error("config key `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Usage(String),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: spinbeat_core::Error,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for configuration or usage problems, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Stage { .. } | CliError::Io { .. } => 2,
        }
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(spinbeat_core::Error) -> CliError {
        move |source| CliError::Stage { stage, source }
    }

    pub(crate) fn io(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.to_string();
        move |source| CliError::Io { context, source }
    }
}
