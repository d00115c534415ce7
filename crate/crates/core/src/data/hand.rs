//! End-effector description: links with collision geometry, revolute joints
//! forming a forest below the base, plus aperture and payload.
//!
//! ```xml
//! <hand name="gripper" aperture="0.09" payload="0.5">
//!   <base_frame>1 0 0 0  0 1 0 0  0 0 1 0  0 0 0 1</base_frame>
//!   <approach_axis>0 0 1</approach_axis>
//!   <link name="palm"><box><size>0.04 0.04 0.01</size></box></link>
//!   <link name="finger"><mesh>finger.off</mesh></link>
//!   <joint name="j0" type="revolute" parent="palm" child="finger">
//!     <origin>1 0 0 0.02  0 1 0 0  0 0 1 0  0 0 0 1</origin>
//!     <axis>0 1 0</axis>
//!     <limits lo="0" hi="1.5"/>
//!     <close>hi</close>
//!   </joint>
//! </hand>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Vector3;

use super::mesh::{load_mesh, TriMesh};
use super::xml::{fmt_num, fmt_pose, fmt_vec3, parse_document, Elem, XmlWriter};
use super::{read_text, resolve_relative, DataError};
use crate::se3::Pose;

#[derive(Debug, Clone, PartialEq)]
pub enum LinkGeometry {
    None,
    Box { size: Vector3<f64>, center: Vector3<f64> },
    Mesh(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub geometry: LinkGeometry,
    /// Collision mesh in the link frame; filled for boxes at parse time and
    /// for mesh files by [`load_hand_model`].
    pub mesh: Option<TriMesh>,
}

/// Limit a joint moves toward while the fingers close.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closing {
    #[default]
    Hi,
    Lo,
}

impl FromStr for Closing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hi" => Ok(Closing::Hi),
            "lo" => Ok(Closing::Lo),
            other => Err(format!("unknown closing direction '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: String,
    pub child: String,
    /// Joint frame relative to the parent link frame at zero angle.
    pub origin: Pose,
    /// Unit axis in the joint frame.
    pub axis: Vector3<f64>,
    pub lo: f64,
    pub hi: f64,
    pub closing: Closing,
}

impl Joint {
    pub fn clamp(&self, q: f64) -> f64 {
        q.clamp(self.lo, self.hi)
    }

    pub fn closing_limit(&self) -> f64 {
        match self.closing {
            Closing::Hi => self.hi,
            Closing::Lo => self.lo,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandModel {
    pub name: String,
    /// Base link frame relative to the end-effector (grasp) frame.
    pub base_frame: Pose,
    pub approach_axis: Vector3<f64>,
    /// meters
    pub aperture: f64,
    /// kg
    pub payload: f64,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    /// Joint indices, parents before children.
    order: Vec<usize>,
}

impl HandModel {
    pub fn link(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    /// Joints sorted so that every parent precedes its children.
    pub fn joints_topological(&self) -> impl Iterator<Item = &Joint> {
        self.order.iter().map(|&i| &self.joints[i])
    }

    /// Indices into `joints`, parents before children.
    pub fn joint_order(&self) -> &[usize] {
        &self.order
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    /// Links without a parent joint; they move rigidly with the base frame.
    pub fn root_links(&self) -> impl Iterator<Item = &Link> {
        self.links
            .iter()
            .filter(|l| !self.joints.iter().any(|j| j.child == l.name))
    }

    /// Names of the joints between the base and `link`, base first.
    pub fn joint_path(&self, link: &str) -> Vec<&str> {
        let mut path = Vec::new();
        let mut current = link;
        while let Some(j) = self.joints.iter().find(|j| j.child == current) {
            path.push(j.name.as_str());
            current = &j.parent;
        }
        path.reverse();
        path
    }

    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "hand")?;
        root.allow_attrs(&["name", "aperture", "payload"])?;
        root.allow_children(&["base_frame", "approach_axis", "link", "joint"])?;
        let name = root.req_attr("name")?.to_string();
        let aperture: f64 = root.req_parse_attr("aperture")?;
        let payload: f64 = root.req_parse_attr("payload")?;
        if !(aperture > 0.0) || !(payload > 0.0) {
            return Err(root.semantic("aperture and payload must be positive"));
        }
        let base_frame = match root.child("base_frame")? {
            Some(e) => e.pose()?,
            None => Pose::identity(),
        };
        let approach_axis = match root.child("approach_axis")? {
            Some(e) => unit(&e)?,
            None => Vector3::z(),
        };

        let mut links = Vec::new();
        for l in root.children_named("link") {
            l.allow_attrs(&["name"])?;
            l.allow_children(&["box", "mesh"])?;
            let lname = l.req_attr("name")?.to_string();
            if links.iter().any(|x: &Link| x.name == lname) {
                return Err(l.semantic(format!("duplicate link '{lname}'")));
            }
            let boxed = l.child("box")?;
            let meshed = l.child("mesh")?;
            let (geometry, mesh) = match (boxed, meshed) {
                (Some(_), Some(_)) => return Err(l.schema("a link has either <box> or <mesh>, not both")),
                (Some(b), None) => {
                    b.allow_attrs(&[])?;
                    b.allow_children(&["size", "center"])?;
                    let size_el = b.req_child("size")?;
                    let size = size_el.vector3()?;
                    if size.iter().any(|&s| !(s > 0.0)) {
                        return Err(size_el.semantic("box extents must be positive"));
                    }
                    let center = match b.child("center")? {
                        Some(c) => c.vector3()?,
                        None => Vector3::zeros(),
                    };
                    (LinkGeometry::Box { size, center }, Some(TriMesh::cuboid(size, center)))
                }
                (None, Some(m)) => (LinkGeometry::Mesh(PathBuf::from(m.text())), None),
                (None, None) => (LinkGeometry::None, None),
            };
            links.push(Link {
                name: lname,
                geometry,
                mesh,
            });
        }
        if links.is_empty() {
            return Err(root.schema("a hand needs at least one <link>"));
        }

        let mut joints: Vec<Joint> = Vec::new();
        for j in root.children_named("joint") {
            j.allow_attrs(&["name", "type", "parent", "child"])?;
            j.allow_children(&["origin", "axis", "limits", "close"])?;
            let jname = j.req_attr("name")?.to_string();
            if joints.iter().any(|x| x.name == jname) {
                return Err(j.semantic(format!("duplicate joint '{jname}'")));
            }
            let kind = j.req_attr("type")?;
            if kind != "revolute" {
                return Err(j.schema(format!("unsupported joint type '{kind}'")));
            }
            let parent = j.req_attr("parent")?.to_string();
            let child = j.req_attr("child")?.to_string();
            for l in [&parent, &child] {
                if !links.iter().any(|x| &x.name == l) {
                    return Err(j.semantic(format!("unknown link '{l}'")));
                }
            }
            let origin = match j.child("origin")? {
                Some(o) => o.pose()?,
                None => Pose::identity(),
            };
            let axis = unit(&j.req_child("axis")?)?;
            let lim = j.req_child("limits")?;
            lim.allow_attrs(&["lo", "hi"])?;
            let lo: f64 = lim.req_parse_attr("lo")?;
            let hi: f64 = lim.req_parse_attr("hi")?;
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(lim.semantic(format!("limits must satisfy lo < hi, got [{lo}, {hi}]")));
            }
            let closing = match j.child("close")? {
                Some(c) => c.text().parse().map_err(|e: String| c.schema(e))?,
                None => Closing::default(),
            };
            joints.push(Joint {
                name: jname,
                parent,
                child,
                origin,
                axis,
                lo,
                hi,
                closing,
            });
        }
        let order = topological_order(&joints, file)?;
        Ok(HandModel {
            name,
            base_frame,
            approach_axis,
            aperture,
            payload,
            links,
            joints,
            order,
        })
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open(
            "hand",
            &[
                ("name", self.name.clone()),
                ("aperture", fmt_num(self.aperture)),
                ("payload", fmt_num(self.payload)),
            ],
        );
        w.leaf("base_frame", &[], &fmt_pose(&self.base_frame));
        w.leaf("approach_axis", &[], &fmt_vec3(&self.approach_axis));
        for l in &self.links {
            match &l.geometry {
                LinkGeometry::None => w.empty("link", &[("name", l.name.clone())]),
                LinkGeometry::Box { size, center } => {
                    w.open("link", &[("name", l.name.clone())]);
                    w.open("box", &[]);
                    w.leaf("size", &[], &fmt_vec3(size));
                    w.leaf("center", &[], &fmt_vec3(center));
                    w.close("box");
                    w.close("link");
                }
                LinkGeometry::Mesh(p) => {
                    w.open("link", &[("name", l.name.clone())]);
                    w.leaf("mesh", &[], &p.display().to_string());
                    w.close("link");
                }
            }
        }
        for j in &self.joints {
            w.open(
                "joint",
                &[
                    ("name", j.name.clone()),
                    ("type", "revolute".into()),
                    ("parent", j.parent.clone()),
                    ("child", j.child.clone()),
                ],
            );
            w.leaf("origin", &[], &fmt_pose(&j.origin));
            w.leaf("axis", &[], &fmt_vec3(&j.axis));
            w.empty("limits", &[("lo", fmt_num(j.lo)), ("hi", fmt_num(j.hi))]);
            let close = match j.closing {
                Closing::Hi => "hi",
                Closing::Lo => "lo",
            };
            w.leaf("close", &[], close);
            w.close("joint");
        }
        w.close("hand");
        w.finish()
    }

    /// Loads mesh files referenced by links, relative to `hand_file`.
    pub fn load_meshes(&mut self, hand_file: &Path) -> Result<(), DataError> {
        for l in &mut self.links {
            if let LinkGeometry::Mesh(p) = &l.geometry {
                l.mesh = Some(load_mesh(&resolve_relative(hand_file, p))?);
            }
        }
        Ok(())
    }
}

fn unit(e: &Elem) -> Result<Vector3<f64>, DataError> {
    let v = e.vector3()?;
    let n = v.norm();
    if !(n > 1e-12) {
        return Err(e.semantic("axis must be non-zero"));
    }
    Ok(v / n)
}

/// Each link has at most one parent joint and following parents never
/// revisits a link.
fn topological_order(joints: &[Joint], file: &str) -> Result<Vec<usize>, DataError> {
    let cyclic = |message: String| DataError::CyclicKinematics {
        file: file.to_string(),
        message,
    };
    let mut parent_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, j) in joints.iter().enumerate() {
        if j.parent == j.child {
            return Err(cyclic(format!("joint '{}' connects link '{}' to itself", j.name, j.child)));
        }
        if let Some(&other) = parent_of.get(j.child.as_str()) {
            return Err(cyclic(format!(
                "link '{}' has two parent joints ('{}' and '{}')",
                j.child, joints[other].name, j.name
            )));
        }
        parent_of.insert(&j.child, i);
    }
    let mut depth: Vec<(usize, usize)> = Vec::with_capacity(joints.len());
    for (i, j) in joints.iter().enumerate() {
        let mut seen = BTreeSet::from([j.child.as_str()]);
        let mut current = j.parent.as_str();
        let mut d = 0;
        while let Some(&p) = parent_of.get(current) {
            if !seen.insert(current) {
                return Err(cyclic(format!("joint '{}' lies on a kinematic cycle", j.name)));
            }
            current = &joints[p].parent;
            d += 1;
        }
        if seen.contains(current) {
            return Err(cyclic(format!("joint '{}' lies on a kinematic cycle", j.name)));
        }
        depth.push((d, i));
    }
    depth.sort();
    Ok(depth.into_iter().map(|(_, i)| i).collect())
}

/// Parses a hand description and loads the link meshes it references.
pub fn load_hand_model(path: &Path) -> Result<HandModel, DataError> {
    let mut hand = HandModel::parse_str(&read_text(path)?, &path.display().to_string())?;
    hand.load_meshes(path)?;
    Ok(hand)
}
