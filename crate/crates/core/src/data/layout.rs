use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use nalgebra::Vector2;

use super::xml::{fmt_num, fmt_pose, parse_document, Elem, XmlWriter};
use super::mesh::{load_mesh, TriMesh};
use super::{read_text, resolve_relative, DataError};
use crate::se3::{Pose, RegionGrid};

/// Explicit graspability decision that replaces the payload/aperture test.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspableOverride {
    pub graspable: bool,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectInstance {
    /// YCB identifier.
    pub name: String,
    /// Mesh file, relative to the layout file unless absolute.
    pub mesh_ref: PathBuf,
    pub pose: Pose,
    /// kg
    pub mass: f64,
    /// Smallest graspable dimension, meters.
    pub min_grip_dimension: f64,
    pub graspable_override: Option<GraspableOverride>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub id: u8,
    pub objects: Vec<ObjectInstance>,
    pub grid: RegionGrid,
    /// Composite score published for a reference run, used for discrepancy notes.
    pub published_score: Option<f64>,
}

impl Layout {
    pub fn object(&self, name: &str) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "layout")?;
        root.allow_attrs(&["id", "published_score"])?;
        root.allow_children(&["object"])?;
        let id: u8 = root.req_parse_attr("id")?;
        if id > 2 {
            return Err(root.semantic(format!("layout id must be 0, 1 or 2, got {id}")));
        }
        let published_score = root.parse_attr("published_score")?;
        let grid = RegionGrid::graspa();
        let mut names = BTreeSet::new();
        let mut objects = Vec::new();
        for e in root.children_named("object") {
            e.allow_attrs(&["name"])?;
            e.allow_children(&["mesh", "pose", "mass", "min_grip", "graspable"])?;
            let name = e.req_attr("name")?.to_string();
            if !names.insert(name.clone()) {
                return Err(e.semantic(format!("duplicate object name '{name}'")));
            }
            let pose = e.req_child("pose")?;
            let pose_value = pose.pose()?;
            if pose_value.position.z < -1e-9 {
                return Err(pose.semantic("object lies below the board plane"));
            }
            if !grid.contains(&Vector2::new(pose_value.position.x, pose_value.position.y)) {
                return Err(pose.semantic("object position is outside the board"));
            }
            let mass_el = e.req_child("mass")?;
            let mass: f64 = mass_el.parse_text()?;
            if !(mass > 0.0) {
                return Err(mass_el.semantic("mass must be positive"));
            }
            let grip_el = e.req_child("min_grip")?;
            let min_grip_dimension: f64 = grip_el.parse_text()?;
            if !(min_grip_dimension > 0.0) {
                return Err(grip_el.semantic("min_grip must be positive"));
            }
            let graspable_override = match e.child("graspable")? {
                None => None,
                Some(g) => {
                    g.allow_attrs(&["value"])?;
                    let graspable = g
                        .bool_attr("value")?
                        .ok_or_else(|| g.schema("missing attribute 'value'"))?;
                    let justification = g.text().to_string();
                    if justification.is_empty() {
                        return Err(g.semantic("graspability override needs a justification"));
                    }
                    Some(GraspableOverride {
                        graspable,
                        justification,
                    })
                }
            };
            objects.push(ObjectInstance {
                name,
                mesh_ref: PathBuf::from(e.req_child("mesh")?.text()),
                pose: pose_value,
                mass,
                min_grip_dimension,
                graspable_override,
            });
        }
        Ok(Layout {
            id,
            objects,
            grid,
            published_score,
        })
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        let mut attrs = vec![("id", self.id.to_string())];
        if let Some(s) = self.published_score {
            attrs.push(("published_score", fmt_num(s)));
        }
        w.open("layout", &attrs);
        for o in &self.objects {
            w.open("object", &[("name", o.name.clone())]);
            w.leaf("mesh", &[], &o.mesh_ref.display().to_string());
            w.leaf("pose", &[], &fmt_pose(&o.pose));
            w.leaf("mass", &[], &fmt_num(o.mass));
            w.leaf("min_grip", &[], &fmt_num(o.min_grip_dimension));
            if let Some(g) = &o.graspable_override {
                w.leaf("graspable", &[("value", g.graspable.to_string())], &g.justification);
            }
            w.close("object");
        }
        w.close("layout");
        w.finish()
    }
}

pub fn parse_layout(path: &Path) -> Result<Layout, DataError> {
    Layout::parse_str(&read_text(path)?, &path.display().to_string())
}

/// Loads every object mesh, resolving references against the layout file.
pub fn load_layout_meshes(layout: &Layout, layout_file: &Path) -> Result<BTreeMap<String, TriMesh>, DataError> {
    layout
        .objects
        .iter()
        .map(|o| Ok((o.name.clone(), load_mesh(&resolve_relative(layout_file, &o.mesh_ref))?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"<layout id="0">
      <object name="foam_brick">
        <mesh>meshes/foam_brick.off</mesh>
        <pose>1 0 0 0.1  0 1 0 0.1  0 0 1 0.025  0 0 0 1</pose>
        <mass>0.028</mass>
        <min_grip>0.05</min_grip>
      </object>
    </layout>"#;

    #[test]
    fn minimal_layout() {
        let l = Layout::parse_str(ONE, "mem").unwrap();
        assert_eq!(l.id, 0);
        assert_eq!(l.object_count(), 1);
        assert_eq!(l.objects[0].mass, 0.028);
        assert_eq!(Layout::parse_str(&l.to_xml(), "mem").unwrap(), l);
    }

    #[test]
    fn bad_rotation_is_semantic_error_with_path() {
        let bad = ONE.replace("0 0 1 0.025", "0 0 2 0.025");
        let e = Layout::parse_str(&bad, "mem").unwrap_err();
        match e {
            DataError::Semantic { element, .. } => assert_eq!(element, "layout/object[foam_brick]/pose"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_bad_masses() {
        let obj = &ONE[ONE.find("<object").unwrap()..ONE.find("</layout>").unwrap()];
        let dup = ONE.replace("</layout>", &format!("{obj}</layout>"));
        assert!(matches!(Layout::parse_str(&dup, "mem"), Err(DataError::Semantic { .. })));
        let neg = ONE.replace("<mass>0.028</mass>", "<mass>-1</mass>");
        assert!(matches!(Layout::parse_str(&neg, "mem"), Err(DataError::Semantic { .. })));
        let below = ONE.replace("0.025  0 0 0 1", "-0.5  0 0 0 1");
        assert!(matches!(Layout::parse_str(&below, "mem"), Err(DataError::Semantic { .. })));
        let missing = ONE.replace("<min_grip>0.05</min_grip>", "");
        assert!(matches!(Layout::parse_str(&missing, "mem"), Err(DataError::Schema { .. })));
    }

    #[test]
    fn override_requires_justification() {
        let ov = ONE.replace("</min_grip>", "</min_grip><graspable value=\"false\">very low profile</graspable>");
        let l = Layout::parse_str(&ov, "mem").unwrap();
        let g = l.objects[0].graspable_override.as_ref().unwrap();
        assert!(!g.graspable);
        assert_eq!(g.justification, "very low profile");
        let empty = ONE.replace("</min_grip>", "</min_grip><graspable value=\"false\"/>");
        assert!(Layout::parse_str(&empty, "mem").is_err());
    }

    #[test]
    fn syntax_error_reports_position() {
        let e = Layout::parse_str("<layout id=\"0\"><object></layout>", "f.xml").unwrap_err();
        assert!(matches!(e, DataError::Syntax { line: 1, .. }), "{e}");
    }
}
