//! Batch driver: mesh, operators, spectrum, plasmon norms and CALR sweep,
//! written as CSV/JSON artifacts with a hashed manifest.

mod compare;
mod config;
mod run;

pub use compare::compare_report;
pub use config::{NormOrdering, RunConfig};
pub use run::{configure_parallelism, run_pipeline, RunSummary};

use crate::error::Error;

/// How far a run goes; each stage includes the ones it depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Mesh,
    Spectrum,
    Plasmon,
    Decay,
    Calr,
    Report,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Error,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Stage { .. } => 3,
        }
    }
}

pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> PipelineError {
    move |source| PipelineError::Stage { stage, source }
}
