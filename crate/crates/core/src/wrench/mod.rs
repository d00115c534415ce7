//! Simulated finger closure, contact wrenches, wrench-space hulls and the
//! grasp quality score S3.

mod closure;
mod cone;
mod hull;
mod kinematics;
mod proximity;
mod quality;

use nalgebra::Vector3;
use thiserror::Error;

pub use closure::{close_fingers, ClosureSettings, ObjectModel};
pub use cone::{cone_edges, contact_wrenches, tangent_basis, wrench, Wrench};
pub use hull::{convex_hull, hull_radius, Hull, HullFacet};
pub use kinematics::{forward_kinematics, joint_vector};
pub use proximity::{closest_point_on_triangle, closest_segment_segment, triangle_distance, MeshBvh, Proximity};
pub use quality::{
    grasp_quality, object_quality, ows_radius, perturbations, PerturbationResult, QualityResult, QualitySettings,
    TrialQuality, PERTURBATION_COUNT,
};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum WrenchError {
    #[error("unknown joint '{0}'")]
    UnknownJoint(String),
    #[error("link '{link}' intersects the object at the pregrasp configuration")]
    InitialPenetration { link: String },
    #[error("object wrench space needs at least 20 surface samples, got {0}")]
    TooFewSamples(usize),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
}

/// Point contact on the object surface, in the board frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPoint {
    pub position: Vector3<f64>,
    /// Outward object normal.
    pub normal: Vector3<f64>,
    /// Hand link that touched the object.
    pub link: String,
}
