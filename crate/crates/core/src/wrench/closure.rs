use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::data::{HandModel, TriMesh};
use crate::se3::Pose;

use super::kinematics::{joint_vector, link_poses};
use super::proximity::{MeshBvh, Proximity};
use super::{ContactPoint, WrenchError};

const BISECTIONS: usize = 30;

/// An object mesh placed on the board, with its proximity tree.
#[derive(Debug, Clone)]
pub struct ObjectModel {
    pub mesh: TriMesh,
    pub bvh: MeshBvh,
    pub pose: Pose,
}

impl ObjectModel {
    pub fn new(mesh: TriMesh, pose: Pose) -> Self {
        let bvh = MeshBvh::new(&mesh);
        Self { mesh, bvh, pose }
    }

    pub fn center_of_mass(&self) -> Vector3<f64> {
        self.pose.transform_point(&self.mesh.center_of_mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureSettings {
    /// Distance at which a link registers a contact, meters.
    pub contact_eps: f64,
    /// Joint increment per step, radians.
    pub step: f64,
}

impl Default for ClosureSettings {
    fn default() -> Self {
        Self {
            contact_eps: 0.001,
            step: 1f64.to_radians(),
        }
    }
}

struct LinkShape {
    link: usize,
    triangles: Vec<[Vector3<f64>; 3]>,
    bvh: MeshBvh,
    /// Indices of the joints between the base and this link.
    path: Vec<usize>,
}

enum State {
    Clear,
    Touch(Proximity),
    Penetrate,
}

fn evaluate(shape: &LinkShape, link_pose: &Pose, object: &ObjectModel, eps: f64) -> State {
    let to_object = object.pose.inverse().compose(link_pose);
    let tris: Vec<[Vector3<f64>; 3]> = shape
        .triangles
        .iter()
        .map(|t| t.map(|v| to_object.transform_point(&v)))
        .collect();
    let near = object.bvh.closest(&tris, eps);
    if matches!(near, Some(p) if p.distance == 0.0) {
        return State::Penetrate;
    }
    if object.bvh.contains(&tris[0][0]) {
        return State::Penetrate;
    }
    let object_vertex = to_object.inverse().transform_point(&object.mesh.vertices[object.mesh.triangles[0][0] as usize]);
    if shape.bvh.contains(&object_vertex) {
        return State::Penetrate;
    }
    match near {
        Some(p) => State::Touch(p),
        None => State::Clear,
    }
}

/// Closest approach of a link regardless of `eps`, used after bisection.
fn nearest(shape: &LinkShape, link_pose: &Pose, object: &ObjectModel) -> Option<Proximity> {
    let to_object = object.pose.inverse().compose(link_pose);
    let tris: Vec<[Vector3<f64>; 3]> = shape
        .triangles
        .iter()
        .map(|t| t.map(|v| to_object.transform_point(&v)))
        .collect();
    object.bvh.closest(&tris, f64::INFINITY)
}

struct Closure<'a> {
    hand: &'a HandModel,
    object: &'a ObjectModel,
    grasp_pose: Pose,
    shapes: Vec<LinkShape>,
    eps: f64,
    contacts: Vec<ContactPoint>,
    stopped: Vec<bool>,
}

impl Closure<'_> {
    fn register(&mut self, shape: usize, p: &Proximity) {
        let s = &self.shapes[shape];
        let position = self.object.pose.transform_point(&p.point);
        let normal = self.object.pose.transform_vector(&self.object.mesh.triangle_normal(p.triangle));
        for &j in &s.path {
            self.stopped[j] = true;
        }
        if self.contacts.iter().any(|c| (c.position - position).norm() <= 2.0 * self.eps) {
            return;
        }
        self.contacts.push(ContactPoint {
            position,
            normal,
            link: self.hand.links[s.link].name.clone(),
        });
    }

    fn moving(&self, shape: usize, active: &[bool]) -> bool {
        self.shapes[shape].path.iter().any(|&j| active[j])
    }
}

/// Closes the fingers from `pregrasp` until every joint is blocked by a
/// contact or sits at its closing limit. Joints advance together in equal
/// increments; a step that would penetrate the object is bisected.
pub fn close_fingers(
    hand: &HandModel,
    grasp_pose: &Pose,
    pregrasp: &BTreeMap<String, f64>,
    object: &ObjectModel,
    settings: &ClosureSettings,
) -> Result<Vec<ContactPoint>, WrenchError> {
    let mut q = joint_vector(hand, pregrasp)?;
    let shapes: Vec<LinkShape> = hand
        .links
        .iter()
        .enumerate()
        .filter_map(|(i, l)| {
            let mesh = l.mesh.as_ref()?;
            let path = hand
                .joint_path(&l.name)
                .iter()
                .map(|n| hand.joints.iter().position(|j| j.name == *n).expect("joint of hand"))
                .collect();
            Some(LinkShape {
                link: i,
                triangles: (0..mesh.triangles.len()).map(|t| mesh.triangle(t)).collect(),
                bvh: MeshBvh::new(mesh),
                path,
            })
        })
        .collect();
    let mut c = Closure {
        hand,
        object,
        grasp_pose: *grasp_pose,
        shapes,
        eps: settings.contact_eps,
        contacts: Vec::new(),
        stopped: vec![false; hand.joints.len()],
    };

    let poses = link_poses(hand, &c.grasp_pose, &q);
    let mut touching = Vec::new();
    for (si, s) in c.shapes.iter().enumerate() {
        match evaluate(s, &poses[s.link], object, c.eps) {
            State::Penetrate => {
                return Err(WrenchError::InitialPenetration {
                    link: hand.links[s.link].name.clone(),
                })
            }
            State::Touch(p) => touching.push((si, p)),
            State::Clear => {}
        }
    }
    for (si, p) in touching {
        c.register(si, &p);
    }

    let limits: Vec<f64> = hand.joints.iter().map(|j| j.closing_limit()).collect();
    loop {
        let active: Vec<bool> = (0..q.len()).map(|j| !c.stopped[j] && q[j] != limits[j]).collect();
        if !active.iter().any(|&a| a) {
            break;
        }
        let target: Vec<f64> = (0..q.len())
            .map(|j| {
                if !active[j] {
                    return q[j];
                }
                let d = limits[j] - q[j];
                if d.abs() <= settings.step {
                    limits[j]
                } else {
                    q[j] + settings.step * d.signum()
                }
            })
            .collect();
        let moving: Vec<usize> = (0..c.shapes.len()).filter(|&s| c.moving(s, &active)).collect();
        let at = |t: f64| -> Vec<f64> { q.iter().zip(&target).map(|(a, b)| a + t * (b - a)).collect() };
        let probe = |t: f64| -> (Vec<f64>, Vec<(usize, State)>) {
            let qt = at(t);
            let poses = link_poses(hand, &c.grasp_pose, &qt);
            let states = moving
                .iter()
                .map(|&s| (s, evaluate(&c.shapes[s], &poses[c.shapes[s].link], object, c.eps)))
                .collect();
            (qt, states)
        };

        let (q_full, states) = probe(1.0);
        if !states.iter().any(|(_, st)| matches!(st, State::Penetrate)) {
            q = q_full;
            let touches: Vec<(usize, Proximity)> = states
                .into_iter()
                .filter_map(|(s, st)| match st {
                    State::Touch(p) => Some((s, p)),
                    _ => None,
                })
                .collect();
            for (s, p) in touches {
                c.register(s, &p);
            }
            continue;
        }

        // bisect for the last penetration-free fraction of the step
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut hi_states = states;
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let (_, st) = probe(mid);
            if st.iter().any(|(_, s)| matches!(s, State::Penetrate)) {
                hi = mid;
                hi_states = st;
            } else {
                lo = mid;
            }
        }
        let (q_safe, safe_states) = probe(lo);
        q = q_safe;
        let poses = link_poses(hand, &c.grasp_pose, &q);
        let blocked: Vec<usize> = hi_states
            .iter()
            .filter(|(_, st)| matches!(st, State::Penetrate))
            .map(|(s, _)| *s)
            .collect();
        let mut registered = Vec::new();
        for (s, st) in safe_states {
            match st {
                State::Touch(p) => registered.push((s, p)),
                _ if blocked.contains(&s) => {
                    if let Some(p) = nearest(&c.shapes[s], &poses[c.shapes[s].link], object) {
                        registered.push((s, p));
                    }
                }
                _ => {}
            }
        }
        for (s, p) in registered {
            c.register(s, &p);
        }
    }
    Ok(c.contacts)
}
