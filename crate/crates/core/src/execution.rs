//! Execution scores: binary success (S4), stability along the fixed lift and
//! rotate trajectory (S5) and obstacle avoidance in clutter (S6).

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::data::{ExecutionLog, Modality, ObjectRecord, TrialOutcome};
use crate::se3::{axis_angle, Pose};

/// Waypoints of the stability trajectory.
pub const WAYPOINT_COUNT: u8 = 5;
pub const STABILITY_ROTATION: f64 = std::f64::consts::FRAC_PI_4;
pub const TILT_ANGLE: f64 = std::f64::consts::FRAC_PI_6;
/// Approach directions closer than this to the vertical use the fallback
/// tilt axis.
pub const VERTICAL_TOLERANCE: f64 = 1.0 * std::f64::consts::PI / 180.0;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ExecutionError {
    #[error("object '{object}': {found} trials logged, expected {expected}")]
    TrialCountMismatch { object: String, expected: usize, found: usize },
    #[error("object '{object}' trial {trial}: {message}")]
    RangeError { object: String, trial: usize, message: String },
    #[error("obstacle avoidance is only scored in clutter modality")]
    ModalityError,
    #[error("object '{0}' has no execution data")]
    NoData(String),
    #[error("object '{0}' is not in the execution log")]
    UnknownObject(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityTrajectory {
    /// Lifted pose (p0, R_gr).
    pub base: Pose,
    pub waypoints: [Pose; 5],
    pub delta_p: f64,
    /// Nominal duration of each rotation, seconds. Metadata only.
    pub rotation_duration: f64,
    /// World-frame axis used for the tilt of the fifth waypoint.
    pub tilt_axis: Vector3<f64>,
}

/// Lift by `delta_p` along the board vertical, then: +45° about the approach
/// axis, back, −45°, back, and a 30° tilt of the approach toward the table.
pub fn stability_waypoints(grasp: &Pose, approach_axis: &Vector3<f64>, delta_p: f64) -> StabilityTrajectory {
    let axis = approach_axis.normalize();
    let p0 = grasp.position + delta_p * Vector3::z();
    let r = grasp.rotation;
    let plus = axis_angle(&axis, STABILITY_ROTATION);
    let minus = axis_angle(&axis, -STABILITY_ROTATION);
    let a_world = r * axis;
    let tilt_axis = if a_world.normalize().z.abs().min(1.0).acos() <= VERTICAL_TOLERANCE {
        Vector3::x()
    } else {
        Vector3::z().cross(&a_world).normalize()
    };
    let tilt = |sign: f64| axis_angle(&tilt_axis, sign * TILT_ANGLE);
    let (q_pos, q_neg) = (tilt(1.0), tilt(-1.0));
    let world_tilt: Matrix3<f64> = if (q_neg * a_world).z < (q_pos * a_world).z - 1e-12 { q_neg } else { q_pos };
    let pose = |rot: Matrix3<f64>| Pose::from_parts(p0, rot);
    StabilityTrajectory {
        base: pose(r),
        waypoints: [pose(r * plus), pose(r), pose(r * minus), pose(r), pose(world_tilt * r)],
        delta_p,
        rotation_duration: 2.0,
        tilt_axis,
    }
}

fn trials<'a>(log: &'a ExecutionLog, object: &str, t: usize) -> Result<&'a [TrialOutcome], ExecutionError> {
    let record = log
        .objects
        .get(object)
        .ok_or_else(|| ExecutionError::UnknownObject(object.to_string()))?;
    let trials = match record {
        ObjectRecord::NoData => return Err(ExecutionError::NoData(object.to_string())),
        ObjectRecord::Trials(v) => v.as_slice(),
    };
    if trials.len() != t {
        return Err(ExecutionError::TrialCountMismatch {
            object: object.to_string(),
            expected: t,
            found: trials.len(),
        });
    }
    for (i, tr) in trials.iter().enumerate() {
        let bad = |message: String| ExecutionError::RangeError {
            object: object.to_string(),
            trial: i + 1,
            message,
        };
        if tr.waypoints_reached > WAYPOINT_COUNT {
            return Err(bad(format!("{} waypoints reached, at most {WAYPOINT_COUNT}", tr.waypoints_reached)));
        }
        if !tr.grasped && tr.waypoints_reached != 0 {
            return Err(bad("waypoints reached without a successful grasp".into()));
        }
    }
    Ok(trials)
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Per-trial success indicators S4_t.
pub fn success_trials(log: &ExecutionLog, object: &str, t: usize) -> Result<Vec<f64>, ExecutionError> {
    Ok(trials(log, object, t)?
        .iter()
        .map(|tr| if tr.grasped { 1.0 } else { 0.0 })
        .collect())
}

/// Per-trial stability fractions N_w / 5.
pub fn stability_trials(log: &ExecutionLog, object: &str, t: usize) -> Result<Vec<f64>, ExecutionError> {
    Ok(trials(log, object, t)?
        .iter()
        .map(|tr| tr.waypoints_reached as f64 / WAYPOINT_COUNT as f64)
        .collect())
}

/// Per-trial avoidance scores 1 − hits / n_obj.
pub fn obstacle_trials(log: &ExecutionLog, object: &str, t: usize, n_obj: usize) -> Result<Vec<f64>, ExecutionError> {
    if log.modality != Modality::Clutter {
        return Err(ExecutionError::ModalityError);
    }
    trials(log, object, t)?
        .iter()
        .enumerate()
        .map(|(i, tr)| {
            let hits = tr.objects_hit.ok_or_else(|| ExecutionError::RangeError {
                object: object.to_string(),
                trial: i + 1,
                message: "hit count missing".into(),
            })? as usize;
            if hits > n_obj {
                return Err(ExecutionError::RangeError {
                    object: object.to_string(),
                    trial: i + 1,
                    message: format!("{hits} objects hit, layout has {n_obj}"),
                });
            }
            Ok(1.0 - hits as f64 / n_obj as f64)
        })
        .collect()
}

pub fn score_success(log: &ExecutionLog, object: &str, t: usize) -> Result<f64, ExecutionError> {
    success_trials(log, object, t).map(|v| mean(&v))
}

pub fn score_stability(log: &ExecutionLog, object: &str, t: usize) -> Result<f64, ExecutionError> {
    stability_trials(log, object, t).map(|v| mean(&v))
}

pub fn score_obstacles(log: &ExecutionLog, object: &str, t: usize, n_obj: usize) -> Result<f64, ExecutionError> {
    obstacle_trials(log, object, t, n_obj).map(|v| mean(&v))
}

/// All per-trial execution vectors of one object.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectExecution {
    pub s4: Vec<f64>,
    pub s5: Vec<f64>,
    /// Clutter modality only.
    pub s6: Option<Vec<f64>>,
}

impl ObjectExecution {
    pub fn mean_s4(&self) -> f64 {
        mean(&self.s4)
    }

    pub fn mean_s5(&self) -> f64 {
        mean(&self.s5)
    }

    pub fn mean_s6(&self) -> Option<f64> {
        self.s6.as_deref().map(mean)
    }
}

pub fn object_execution(log: &ExecutionLog, object: &str, t: usize, n_obj: usize) -> Result<ObjectExecution, ExecutionError> {
    Ok(ObjectExecution {
        s4: success_trials(log, object, t)?,
        s5: stability_trials(log, object, t)?,
        s6: match log.modality {
            Modality::Clutter => Some(obstacle_trials(log, object, t, n_obj)?),
            Modality::Isolation => None,
        },
    })
}
