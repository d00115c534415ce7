//! Persistent benchmark data: layouts, pose sets, logs, meshes, hand models
//! and configuration, with parsing, validation and serialization.
//!
//! All interchange files are XML. Poses are written as 16 whitespace-separated
//! numbers, the row-major homogeneous 4×4 matrix in meters.

mod config;
mod grasps;
mod hand;
mod layout;
mod logs;
mod mesh;
mod validate;
pub mod xml;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{BenchmarkConfig, EligibilityRule, Modality, LIFT_HEIGHT};
pub use grasps::{parse_grasp_set, GraspSet, GraspTrial};
pub use hand::{load_hand_model, Closing, HandModel, Joint, Link, LinkGeometry};
pub use layout::{load_layout_meshes, parse_layout, GraspableOverride, Layout, ObjectInstance};
pub use logs::{
    parse_execution_log, parse_pose_set, parse_reach_log, ExecutionLog, NamedPose, PoseSet, ReachEntry, ReachLog,
    ReachSource, TrialOutcome,
};
pub use mesh::{load_mesh, TriMesh};
pub use validate::{validate_dataset, DatasetRefs, Finding, ValidationReport};

pub use config::parse_config;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DataError {
    #[error("{file}: {message}")]
    Io { file: String, message: String },
    #[error("{file}:{line}:{col}: syntax error: {message}")]
    Syntax {
        file: String,
        line: u32,
        col: u32,
        message: String,
    },
    #[error("{file}:{line}: schema error at {element}: {message}")]
    Schema {
        file: String,
        line: u32,
        element: String,
        message: String,
    },
    #[error("{file}:{line}: invalid value at {element}: {message}")]
    Semantic {
        file: String,
        line: u32,
        element: String,
        message: String,
    },
    #[error("{file}:{line}: mesh format error: {message}")]
    Format { file: String, line: usize, message: String },
    #[error("{file}: degenerate mesh: {message}")]
    DegenerateMesh { file: String, message: String },
    #[error("{file}: cyclic kinematics: {message}")]
    CyclicKinematics { file: String, message: String },
}

pub(crate) fn read_text(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(|e| DataError::Io {
        file: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Resolves `reference` relative to the directory of `base_file`.
pub fn resolve_relative(base_file: &Path, reference: &Path) -> PathBuf {
    if reference.is_absolute() {
        reference.to_path_buf()
    } else {
        base_file.parent().unwrap_or_else(|| Path::new(".")).join(reference)
    }
}

/// Per-object record in grasp sets and execution logs: either the trials or
/// an explicit marker that no data could be collected.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectRecord<T> {
    Trials(Vec<T>),
    NoData,
}

impl<T> ObjectRecord<T> {
    pub fn trials(&self) -> Option<&[T]> {
        match self {
            ObjectRecord::Trials(t) => Some(t),
            ObjectRecord::NoData => None,
        }
    }
}
