use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{BenchmarkConfig, GraspTrial, HandModel, TriMesh};
use crate::se3::{axis_angle, Pose};

use super::closure::{close_fingers, ClosureSettings, ObjectModel};
use super::cone::{contact_wrenches, wrench};
use super::hull::hull_radius;
use super::{cone_edges, ContactPoint, WrenchError};

/// Nominal pose plus ±δp along the board axes and ±δa about the hand axes.
pub const PERTURBATION_COUNT: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualitySettings {
    pub mu: f64,
    pub cone_edges: usize,
    pub perturb_dp: f64,
    pub perturb_da: f64,
    pub closure: ClosureSettings,
    pub ows_samples: usize,
    pub seed: u64,
}

impl From<&BenchmarkConfig> for QualitySettings {
    fn from(c: &BenchmarkConfig) -> Self {
        Self {
            mu: c.mu,
            cone_edges: c.cone_edges,
            perturb_dp: c.perturb_dp,
            perturb_da: c.perturb_da,
            closure: ClosureSettings {
                contact_eps: c.contact_eps,
                step: c.closure_step,
            },
            ows_samples: c.ows_samples,
            seed: c.seed,
        }
    }
}

impl Default for QualitySettings {
    fn default() -> Self {
        Self::from(&BenchmarkConfig::default())
    }
}

/// The 13 evaluation poses: nominal, then +x −x +y −y +z −z translations in
/// the board frame, then ± rotations about the hand x, y and z axes.
pub fn perturbations(grasp: &Pose, dp: f64, da: f64) -> Vec<Pose> {
    let mut out = Vec::with_capacity(PERTURBATION_COUNT);
    out.push(*grasp);
    for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
        for s in [1.0, -1.0] {
            out.push(Pose::from_parts(grasp.position + s * dp * axis, grasp.rotation));
        }
    }
    for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
        for s in [1.0, -1.0] {
            out.push(Pose::from_parts(grasp.position, grasp.rotation * axis_angle(&axis, s * da)));
        }
    }
    out
}

/// Radius of the object wrench space: friction cones at `samples` surface
/// points drawn uniformly by area with a seeded generator.
pub fn ows_radius(mesh: &TriMesh, mu: f64, m: usize, samples: usize, seed: u64) -> Result<f64, WrenchError> {
    if samples < 20 {
        return Err(WrenchError::TooFewSamples(samples));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for i in 0..mesh.triangles.len() {
        total += mesh.triangle_area(i);
        cumulative.push(total);
    }
    if !(total > 0.0) || !(mesh.max_radius > 0.0) {
        return Err(WrenchError::DegenerateMesh("zero surface area".into()));
    }
    let lambda = 1.0 / mesh.max_radius;
    let com = mesh.center_of_mass;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wrenches = Vec::with_capacity(samples * m);
    for _ in 0..samples {
        let u: f64 = rng.gen_range(0.0..total);
        let tri = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
        let s = r1.sqrt();
        let [a, b, c] = mesh.triangle(tri);
        let p = a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2);
        let n = mesh.triangle_normal(tri);
        wrenches.extend(cone_edges(&n, mu, m).iter().map(|f| wrench(f, &p, &com, lambda)));
    }
    Ok(hull_radius(&wrenches))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult {
    pub pose: Pose,
    pub contacts: Vec<ContactPoint>,
    pub epsilon: f64,
    pub initial_penetration: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialQuality {
    /// `clamp(mean ε / r(OWS), 0, 1)`.
    pub s3: f64,
    pub mean_epsilon: f64,
    pub perturbations: Vec<PerturbationResult>,
}

/// Grasp quality of one trial against an object whose OWS radius is known.
pub fn grasp_quality(
    trial: &GraspTrial,
    object: &ObjectModel,
    hand: &HandModel,
    settings: &QualitySettings,
    r_ows: f64,
) -> Result<TrialQuality, WrenchError> {
    let pregrasp = trial.pregrasp_map();
    let lambda = 1.0 / object.mesh.max_radius;
    let com = object.center_of_mass();
    let results: Vec<PerturbationResult> = perturbations(&trial.pose, settings.perturb_dp, settings.perturb_da)
        .into_par_iter()
        .map(|pose| match close_fingers(hand, &pose, &pregrasp, object, &settings.closure) {
            Ok(contacts) => {
                let w = contact_wrenches(&contacts, settings.mu, settings.cone_edges, lambda, &com);
                Ok(PerturbationResult {
                    pose,
                    epsilon: hull_radius(&w),
                    contacts,
                    initial_penetration: false,
                })
            }
            Err(WrenchError::InitialPenetration { .. }) => Ok(PerturbationResult {
                pose,
                contacts: Vec::new(),
                epsilon: 0.0,
                initial_penetration: true,
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    let mean_epsilon = results.iter().map(|r| r.epsilon).sum::<f64>() / results.len() as f64;
    let s3 = if r_ows > 0.0 {
        (mean_epsilon / r_ows).clamp(0.0, 1.0)
    } else {
        log::warn!("object wrench space radius is 0, quality set to 0");
        0.0
    };
    Ok(TrialQuality {
        s3,
        mean_epsilon,
        perturbations: results,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityResult {
    pub ows_radius: f64,
    pub trials: Vec<TrialQuality>,
}

impl QualityResult {
    pub fn per_trial(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.s3).collect()
    }

    pub fn mean(&self) -> f64 {
        if self.trials.is_empty() {
            return 0.0;
        }
        self.trials.iter().map(|t| t.s3).sum::<f64>() / self.trials.len() as f64
    }
}

/// S3 for every trial of one object; the OWS radius is computed once.
pub fn object_quality(
    trials: &[GraspTrial],
    object: &ObjectModel,
    hand: &HandModel,
    settings: &QualitySettings,
) -> Result<QualityResult, WrenchError> {
    let r_ows = ows_radius(&object.mesh, settings.mu, settings.cone_edges, settings.ows_samples, settings.seed)?;
    let trials = trials
        .par_iter()
        .map(|t| grasp_quality(t, object, hand, settings, r_ows))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QualityResult {
        ows_radius: r_ows,
        trials,
    })
}
