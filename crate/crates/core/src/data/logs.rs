use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector2;

use super::config::Modality;
use super::xml::{fmt_pose, parse_document, Elem, XmlWriter};
use super::{read_text, DataError, ObjectRecord};
use crate::se3::{Pose, RegionGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPose {
    pub name: String,
    pub pose: Pose,
}

/// Target poses for the reachability and calibration tests.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSet {
    pub set_id: u8,
    pub poses: Vec<NamedPose>,
}

impl PoseSet {
    pub fn get(&self, name: &str) -> Option<&Pose> {
        self.poses.iter().find(|p| p.name == name).map(|p| &p.pose)
    }

    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "pose_set")?;
        root.allow_attrs(&["id"])?;
        root.allow_children(&["pose"])?;
        let set_id: u8 = root.req_parse_attr("id")?;
        if set_id > 2 {
            return Err(root.semantic(format!("pose set id must be 0, 1 or 2, got {set_id}")));
        }
        let grid = RegionGrid::graspa();
        let mut seen = BTreeSet::new();
        let mut poses = Vec::new();
        for e in root.children_named("pose") {
            e.allow_attrs(&["name"])?;
            let name = e.req_attr("name")?.to_string();
            if !seen.insert(name.clone()) {
                return Err(e.semantic(format!("duplicate pose name '{name}'")));
            }
            let pose = e.pose()?;
            if !grid.contains(&Vector2::new(pose.position.x, pose.position.y)) {
                return Err(e.semantic("pose lies outside the board"));
            }
            poses.push(NamedPose { name, pose });
        }
        Ok(PoseSet { set_id, poses })
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open("pose_set", &[("id", self.set_id.to_string())]);
        for p in &self.poses {
            w.leaf("pose", &[("name", p.name.clone())], &fmt_pose(&p.pose));
        }
        w.close("pose_set");
        w.finish()
    }
}

pub fn parse_pose_set(path: &Path) -> Result<PoseSet, DataError> {
    PoseSet::parse_str(&read_text(path)?, &path.display().to_string())
}

/// How reached poses were measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachSource {
    ForwardKinematics,
    Vision,
}

impl fmt::Display for ReachSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReachSource::ForwardKinematics => "forward_kinematics",
            ReachSource::Vision => "vision",
        })
    }
}

impl FromStr for ReachSource {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "forward_kinematics" => Ok(ReachSource::ForwardKinematics),
            "vision" => Ok(ReachSource::Vision),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReachEntry {
    Reached(Pose),
    Unreached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachLog {
    pub set_id: u8,
    pub source: ReachSource,
    pub entries: BTreeMap<String, ReachEntry>,
}

impl ReachLog {
    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "reach_log")?;
        root.allow_attrs(&["set", "source"])?;
        root.allow_children(&["entry"])?;
        let set_id = root.req_parse_attr("set")?;
        let source = root.req_parse_attr("source")?;
        let mut entries = BTreeMap::new();
        for e in root.children_named("entry") {
            e.allow_attrs(&["name"])?;
            e.allow_children(&["pose", "unreached"])?;
            let name = e.req_attr("name")?.to_string();
            let entry = match (e.child("pose")?, e.child("unreached")?) {
                (Some(p), None) => ReachEntry::Reached(p.pose()?),
                (None, Some(_)) => ReachEntry::Unreached,
                _ => return Err(e.schema("entry needs exactly one of <pose> or <unreached/>")),
            };
            if entries.insert(name.clone(), entry).is_some() {
                return Err(e.semantic(format!("duplicate entry '{name}'")));
            }
        }
        Ok(ReachLog {
            set_id,
            source,
            entries,
        })
    }

    /// Cross-checks against the pose set the log refers to: same set id,
    /// every entry names a pose in the set and every pose has an entry.
    pub fn check_against(&self, set: &PoseSet) -> Result<(), DataError> {
        let err = |element: String, message: String| DataError::Semantic {
            file: "reach_log".into(),
            line: 0,
            element,
            message,
        };
        if self.set_id != set.set_id {
            return Err(err(
                "reach_log".into(),
                format!("log refers to pose set {}, got set {}", self.set_id, set.set_id),
            ));
        }
        for name in self.entries.keys() {
            if set.get(name).is_none() {
                return Err(err(
                    format!("reach_log/entry[{name}]"),
                    format!("pose '{name}' is not in pose set {}", set.set_id),
                ));
            }
        }
        for p in &set.poses {
            if !self.entries.contains_key(&p.name) {
                return Err(err(
                    "reach_log".into(),
                    format!("pose '{}' has no entry; record unreached poses explicitly", p.name),
                ));
            }
        }
        Ok(())
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open(
            "reach_log",
            &[("set", self.set_id.to_string()), ("source", self.source.to_string())],
        );
        for (name, entry) in &self.entries {
            w.open("entry", &[("name", name.clone())]);
            match entry {
                ReachEntry::Reached(p) => w.leaf("pose", &[], &fmt_pose(p)),
                ReachEntry::Unreached => w.empty("unreached", &[]),
            }
            w.close("entry");
        }
        w.close("reach_log");
        w.finish()
    }
}

pub fn parse_reach_log(path: &Path) -> Result<ReachLog, DataError> {
    ReachLog::parse_str(&read_text(path)?, &path.display().to_string())
}

/// One physical grasp execution as judged by the experimenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub grasped: bool,
    /// Stability waypoints completed without dropping the object, 0..=5.
    pub waypoints_reached: u8,
    /// Objects hit on approach; clutter modality only.
    pub objects_hit: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionLog {
    pub layout_id: u8,
    pub modality: Modality,
    pub objects: BTreeMap<String, ObjectRecord<TrialOutcome>>,
}

impl ExecutionLog {
    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "execution_log")?;
        root.allow_attrs(&["layout", "modality"])?;
        root.allow_children(&["object"])?;
        let layout_id = root.req_parse_attr("layout")?;
        let modality: Modality = root.req_parse_attr("modality")?;
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
                    t.allow_attrs(&["grasped", "waypoints", "hits"])?;
                    let grasped = t
                        .bool_attr("grasped")?
                        .ok_or_else(|| t.schema("missing attribute 'grasped'"))?;
                    let waypoints_reached: u8 = t.req_parse_attr("waypoints")?;
                    if waypoints_reached > 5 {
                        return Err(t.semantic(format!("waypoints must be in 0..=5, got {waypoints_reached}")));
                    }
                    if !grasped && waypoints_reached != 0 {
                        return Err(t.semantic("waypoints must be 0 when the object was not grasped"));
                    }
                    let objects_hit: Option<u32> = t.parse_attr("hits")?;
                    match (modality, objects_hit) {
                        (Modality::Isolation, Some(_)) => {
                            return Err(t.semantic("hits are only recorded in clutter modality"))
                        }
                        (Modality::Clutter, None) => return Err(t.schema("clutter trials need a 'hits' attribute")),
                        _ => {}
                    }
                    trials.push(TrialOutcome {
                        grasped,
                        waypoints_reached,
                        objects_hit,
                    });
                }
                ObjectRecord::Trials(trials)
            };
            if objects.insert(name.clone(), record).is_some() {
                return Err(o.semantic(format!("duplicate object '{name}'")));
            }
        }
        Ok(ExecutionLog {
            layout_id,
            modality,
            objects,
        })
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open(
            "execution_log",
            &[("layout", self.layout_id.to_string()), ("modality", self.modality.to_string())],
        );
        for (name, record) in &self.objects {
            match record {
                ObjectRecord::NoData => w.empty("object", &[("name", name.clone()), ("no_data", "true".into())]),
                ObjectRecord::Trials(trials) => {
                    w.open("object", &[("name", name.clone())]);
                    for t in trials {
                        let mut attrs = vec![
                            ("grasped", t.grasped.to_string()),
                            ("waypoints", t.waypoints_reached.to_string()),
                        ];
                        if let Some(h) = t.objects_hit {
                            attrs.push(("hits", h.to_string()));
                        }
                        w.empty("trial", &attrs);
                    }
                    w.close("object");
                }
            }
        }
        w.close("execution_log");
        w.finish()
    }
}

pub fn parse_execution_log(path: &Path) -> Result<ExecutionLog, DataError> {
    ExecutionLog::parse_str(&read_text(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SET: &str = r#"<pose_set id="1">
      <pose name="a">1 0 0 0.1 0 1 0 0.1 0 0 1 0.05 0 0 0 1</pose>
      <pose name="b">1 0 0 0.3 0 1 0 0.3 0 0 1 0.05 0 0 0 1</pose>
    </pose_set>"#;

    const LOG: &str = r#"<reach_log set="1" source="forward_kinematics">
      <entry name="a"><pose>1 0 0 0.1 0 1 0 0.1 0 0 1 0.06 0 0 0 1</pose></entry>
      <entry name="b"><unreached/></entry>
    </reach_log>"#;

    #[test]
    fn reach_log_against_set() {
        let set = PoseSet::parse_str(SET, "mem").unwrap();
        let log = ReachLog::parse_str(LOG, "mem").unwrap();
        log.check_against(&set).unwrap();
        assert_eq!(log.entries["b"], ReachEntry::Unreached);

        let stray = LOG.replace("name=\"b\"", "name=\"zz\"");
        let log = ReachLog::parse_str(&stray, "mem").unwrap();
        let e = log.check_against(&set).unwrap_err();
        assert!(matches!(e, DataError::Semantic { .. }));
        assert!(e.to_string().contains("zz"));
    }

    #[test]
    fn omitted_pose_is_an_error() {
        let set = PoseSet::parse_str(SET, "mem").unwrap();
        let log = ReachLog::parse_str(&LOG.replace("<entry name=\"b\"><unreached/></entry>", ""), "mem").unwrap();
        assert!(log.check_against(&set).is_err());
    }

    #[test]
    fn entry_needs_exactly_one_outcome() {
        let both = LOG.replace("<unreached/>", "<unreached/><pose>1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 1</pose>");
        assert!(matches!(ReachLog::parse_str(&both, "mem"), Err(DataError::Schema { .. })));
    }

    #[test]
    fn execution_log_invariants() {
        let ok = r#"<execution_log layout="0" modality="isolation">
            <object name="banana"><trial grasped="true" waypoints="4"/><trial grasped="false" waypoints="0"/></object>
            <object name="tomato" no_data="true"/>
        </execution_log>"#;
        let log = ExecutionLog::parse_str(ok, "mem").unwrap();
        assert_eq!(log.objects["tomato"], ObjectRecord::NoData);
        assert_eq!(ExecutionLog::parse_str(&log.to_xml(), "mem").unwrap(), log);

        let dropped = ok.replace("grasped=\"false\" waypoints=\"0\"", "grasped=\"false\" waypoints=\"2\"");
        assert!(matches!(ExecutionLog::parse_str(&dropped, "mem"), Err(DataError::Semantic { .. })));
        let six = ok.replace("waypoints=\"4\"", "waypoints=\"6\"");
        assert!(ExecutionLog::parse_str(&six, "mem").is_err());
        let hits = ok.replace("waypoints=\"4\"", "waypoints=\"4\" hits=\"1\"");
        assert!(ExecutionLog::parse_str(&hits, "mem").is_err());
        let clutter = ok.replace("isolation", "clutter");
        assert!(ExecutionLog::parse_str(&clutter, "mem").is_err());
    }
}
