use std::collections::BTreeMap;
use std::path::Path;

use super::xml::{fmt_num, fmt_pose, parse_document, Elem, XmlWriter};
use super::{read_text, DataError, ObjectRecord};
use crate::se3::Pose;

/// A planned grasp: end-effector pose in the board frame plus pregrasp joints.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspTrial {
    pub pose: Pose,
    /// (joint name, radians), in file order.
    pub pregrasp: Vec<(String, f64)>,
    pub hand_ref: String,
}

impl GraspTrial {
    pub fn pregrasp_map(&self) -> BTreeMap<String, f64> {
        self.pregrasp.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspSet {
    pub layout_id: u8,
    pub objects: BTreeMap<String, ObjectRecord<GraspTrial>>,
}

impl GraspSet {
    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "grasp_set")?;
        root.allow_attrs(&["layout"])?;
        root.allow_children(&["object"])?;
        let layout_id = root.req_parse_attr("layout")?;
        let mut objects = BTreeMap::new();
        for o in root.children_named("object") {
            o.allow_attrs(&["name", "no_data"])?;
            o.allow_children(&["trial"])?;
            let name = o.req_attr("name")?.to_string();
            let record = if o.bool_attr("no_data")?.unwrap_or(false) {
                if o.children().next().is_some() {
                    return Err(o.schema("no_data objects cannot carry trials"));
                }
                ObjectRecord::NoData
            } else {
                let mut trials = Vec::new();
                for t in o.children_named("trial") {
                    t.allow_attrs(&["hand"])?;
                    t.allow_children(&["pose", "pregrasp"])?;
                    let pose = t.req_child("pose")?.pose()?;
                    let mut pregrasp = Vec::new();
                    if let Some(p) = t.child("pregrasp")? {
                        p.allow_attrs(&[])?;
                        p.allow_children(&["joint"])?;
                        for j in p.children_named("joint") {
                            j.allow_attrs(&["name"])?;
                            let jn = j.req_attr("name")?.to_string();
                            if pregrasp.iter().any(|(n, _)| *n == jn) {
                                return Err(j.semantic(format!("joint '{jn}' listed twice")));
                            }
                            let v: f64 = j.parse_text()?;
                            if !v.is_finite() {
                                return Err(j.semantic("joint value must be finite"));
                            }
                            pregrasp.push((jn, v));
                        }
                    }
                    trials.push(GraspTrial {
                        pose,
                        pregrasp,
                        hand_ref: t.req_attr("hand")?.to_string(),
                    });
                }
                ObjectRecord::Trials(trials)
            };
            if objects.insert(name.clone(), record).is_some() {
                return Err(o.semantic(format!("duplicate object '{name}'")));
            }
        }
        Ok(GraspSet { layout_id, objects })
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open("grasp_set", &[("layout", self.layout_id.to_string())]);
        for (name, record) in &self.objects {
            match record {
                ObjectRecord::NoData => w.empty("object", &[("name", name.clone()), ("no_data", "true".into())]),
                ObjectRecord::Trials(trials) => {
                    w.open("object", &[("name", name.clone())]);
                    for t in trials {
                        w.open("trial", &[("hand", t.hand_ref.clone())]);
                        w.leaf("pose", &[], &fmt_pose(&t.pose));
                        w.open("pregrasp", &[]);
                        for (j, v) in &t.pregrasp {
                            w.leaf("joint", &[("name", j.clone())], &fmt_num(*v));
                        }
                        w.close("pregrasp");
                        w.close("trial");
                    }
                    w.close("object");
                }
            }
        }
        w.close("grasp_set");
        w.finish()
    }
}

pub fn parse_grasp_set(path: &Path) -> Result<GraspSet, DataError> {
    GraspSet::parse_str(&read_text(path)?, &path.display().to_string())
}
