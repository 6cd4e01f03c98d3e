//! Scene files: a JSON document naming groups, subgroups, subspaces,
//! candidates, maps and metric probes, plus a list of queries to run on them.
//! The grammar is described in `docs/scene-format.md`.

mod format;
mod report;
mod resolve;
mod run;

use thiserror::Error;

use crate::group::GroupError;
use crate::linalg::LinalgError;
use crate::maps::MapError;
use crate::metric::MetricError;
use crate::suborbifold::SuborbifoldError;

pub use format::{RawQuery, RawScene, Scalar};
pub use report::*;
pub use resolve::{ProbeSpec, Scene, SceneGroup, SceneOptions};
pub use run::{run_query, run_scene, RunOptions};

/// An error raised by one of the engine modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Suborbifold(#[from] SuborbifoldError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl ModuleError {
    /// Name of the innermost error variant, e.g. `NotTransverse`.
    pub fn kind(&self) -> String {
        let mut text = format!("{self:?}");
        loop {
            let stripped = ["Linalg(", "Group(", "Suborbifold(", "Map(", "Metric("]
                .iter()
                .find_map(|w| text.strip_prefix(w));
            match stripped {
                Some(rest) => text = rest.to_string(),
                None => break,
            }
        }
        text.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
    }

    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            ModuleError::Suborbifold(SuborbifoldError::InvariantViolation(_))
                | ModuleError::Map(MapError::InvariantViolation(_))
                | ModuleError::Map(MapError::Suborbifold(SuborbifoldError::InvariantViolation(_)))
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{location}: unresolved {kind} `{name}`")]
    UnresolvedName {
        kind: &'static str,
        name: String,
        location: String,
    },
    #[error("{location}: dimension mismatch, expected {expected}, found {found}")]
    DimensionMismatch {
        location: String,
        expected: usize,
        found: usize,
    },
    #[error("{location}: {message}")]
    InvalidValue { location: String, message: String },
    #[error("{location}: {source}")]
    Module { location: String, source: ModuleError },
}

impl SceneError {
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, SceneError::Module { source, .. } if source.is_invariant_violation())
    }
}

/// Parses scene text into its raw form, reporting syntax and value errors
/// with their line and column.
pub fn parse_raw(text: &str) -> Result<RawScene, SceneError> {
    serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep the message clean
        let message = match message.rfind(" at line ") {
            Some(cut) => message[..cut].to_string(),
            None => message,
        };
        SceneError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    })
}

/// Parses and resolves a scene.
pub fn parse_scene(text: &str, options: &SceneOptions) -> Result<Scene, SceneError> {
    Scene::resolve(parse_raw(text)?, options)
}
