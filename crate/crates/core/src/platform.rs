//! Platform scores: reachability (S0) and camera calibration (S1) per board
//! region, and graspability (S2) per object.

use std::collections::BTreeMap;

use nalgebra::Vector2;
use thiserror::Error;

use crate::data::{HandModel, Layout, ObjectInstance, PoseSet, ReachEntry, ReachLog, TriMesh};
use crate::se3::{is_reached, OutOfBoard, RegionGrid, RegionId, Thresholds};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PlatformError {
    #[error("region {0} contains no poses of the pose set")]
    EmptyRegion(RegionId),
    #[error("pose '{pose}': {source}")]
    PoseOutOfBoard { pose: String, source: OutOfBoard },
    #[error("object '{object}': center of mass {source}")]
    ObjectOutOfBoard { object: String, source: OutOfBoard },
    #[error("pose '{0}' has no entry in the reach log")]
    MissingEntry(String),
    #[error("no score for region {0}")]
    MissingRegion(RegionId),
    #[error("no mesh loaded for object '{0}'")]
    MissingMesh(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionScore {
    pub region: RegionId,
    pub n_reached: usize,
    pub n_total: usize,
    pub score: f64,
}

/// Fraction of reached poses per region. Poses on a boundary count in every
/// adjacent region; unreached entries count toward the total only.
pub fn score_regions(
    set: &PoseSet,
    log: &ReachLog,
    thresholds: Thresholds,
    grid: &RegionGrid,
) -> Result<Vec<RegionScore>, PlatformError> {
    let mut counts = vec![(0usize, 0usize); grid.region_count()];
    for p in &set.poses {
        let xy = Vector2::new(p.pose.position.x, p.pose.position.y);
        let regions = grid.regions_of_point(&xy).map_err(|source| PlatformError::PoseOutOfBoard {
            pose: p.name.clone(),
            source,
        })?;
        let reached = match log.entries.get(&p.name) {
            None => return Err(PlatformError::MissingEntry(p.name.clone())),
            Some(ReachEntry::Unreached) => false,
            Some(ReachEntry::Reached(r)) => is_reached(&p.pose, r, thresholds),
        };
        for id in regions {
            let c = &mut counts[id.0 as usize - 1];
            c.1 += 1;
            if reached {
                c.0 += 1;
            }
        }
    }
    grid.region_ids()
        .zip(counts)
        .map(|(region, (n_reached, n_total))| {
            if n_total == 0 {
                return Err(PlatformError::EmptyRegion(region));
            }
            Ok(RegionScore {
                region,
                n_reached,
                n_total,
                score: n_reached as f64 / n_total as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectRegionScore {
    pub regions: Vec<RegionId>,
    pub score: f64,
}

/// Assigns each object the score of the region holding its center of mass
/// (mesh CoM moved by the layout pose). On a boundary the best adjacent
/// region wins.
pub fn object_region_scores(
    layout: &Layout,
    meshes: &BTreeMap<String, TriMesh>,
    region_scores: &[RegionScore],
) -> Result<BTreeMap<String, ObjectRegionScore>, PlatformError> {
    let mut out = BTreeMap::new();
    for obj in &layout.objects {
        let mesh = meshes
            .get(&obj.name)
            .ok_or_else(|| PlatformError::MissingMesh(obj.name.clone()))?;
        let com = obj.pose.transform_point(&mesh.center_of_mass);
        let regions = layout
            .grid
            .regions_of_point(&Vector2::new(com.x, com.y))
            .map_err(|source| PlatformError::ObjectOutOfBoard {
                object: obj.name.clone(),
                source,
            })?;
        let mut score = f64::NEG_INFINITY;
        for id in &regions {
            let s = region_scores
                .iter()
                .find(|r| r.region == *id)
                .ok_or(PlatformError::MissingRegion(*id))?;
            score = score.max(s.score);
        }
        out.insert(obj.name.clone(), ObjectRegionScore { regions, score });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspabilityResult {
    pub payload_ok: bool,
    pub aperture_ok: bool,
    /// Justification when a layout override decided the score.
    pub overridden: Option<String>,
    pub score: bool,
}

pub fn graspability(obj: &ObjectInstance, hand: &HandModel) -> GraspabilityResult {
    let payload_ok = obj.mass <= hand.payload;
    let aperture_ok = obj.min_grip_dimension < hand.aperture;
    match &obj.graspable_override {
        Some(o) => GraspabilityResult {
            payload_ok,
            aperture_ok,
            overridden: Some(o.justification.clone()),
            score: o.graspable,
        },
        None => GraspabilityResult {
            payload_ok,
            aperture_ok,
            overridden: None,
            score: payload_ok && aperture_ok,
        },
    }
}
