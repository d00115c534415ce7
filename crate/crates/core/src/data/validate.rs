use std::collections::BTreeSet;
use std::fmt;

use super::{BenchmarkConfig, ExecutionLog, GraspSet, HandModel, Layout, Modality, ObjectRecord, PoseSet, ReachLog};

/// The parsed parts of one benchmark run; any of them may be absent.
#[derive(Debug, Default, Clone)]
pub struct DatasetRefs<'a> {
    pub layout: Option<&'a Layout>,
    pub pose_sets: Vec<&'a PoseSet>,
    pub reach_logs: Vec<&'a ReachLog>,
    pub grasps: Option<&'a GraspSet>,
    pub execution: Option<&'a ExecutionLog>,
    pub hand: Option<&'a HandModel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    /// Which part of the dataset the finding is about, e.g. "execution log".
    pub source: String,
    pub object: Option<String>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.object {
            Some(o) => write!(f, "{}: object '{}': {}", self.source, o, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_runnable(&self) -> bool {
        self.findings.is_empty()
    }

    fn push(&mut self, source: &str, object: Option<&str>, message: impl Into<String>) {
        self.findings.push(Finding {
            source: source.to_string(),
            object: object.map(str::to_string),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return writeln!(f, "ok: dataset is consistent");
        }
        for finding in &self.findings {
            writeln!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Cross-file consistency checks. An empty report means the dataset can be
/// scored.
pub fn validate_dataset(refs: &DatasetRefs, config: &BenchmarkConfig) -> ValidationReport {
    let mut r = ValidationReport::default();
    if let Err(e) = config.validate() {
        r.push("config", None, e);
    }
    let t = config.trials;

    for log in &refs.reach_logs {
        let src = format!("{} log", log.source);
        match refs.pose_sets.iter().find(|s| s.set_id == log.set_id) {
            None => r.push(&src, None, format!("references pose set {} which was not provided", log.set_id)),
            Some(set) => {
                for name in log.entries.keys() {
                    if set.get(name).is_none() {
                        r.push(&src, None, format!("pose '{name}' is not in pose set {}", set.set_id));
                    }
                }
                for p in &set.poses {
                    if !log.entries.contains_key(&p.name) {
                        r.push(&src, None, format!("pose '{}' has no entry (use <unreached/>)", p.name));
                    }
                }
            }
        }
    }

    let object_names: Option<BTreeSet<&str>> = refs
        .layout
        .map(|l| l.objects.iter().map(|o| o.name.as_str()).collect());

    if let Some(g) = refs.grasps {
        let src = "grasp set";
        if let Some(l) = refs.layout {
            if g.layout_id != l.id {
                r.push(src, None, format!("layout {} does not match layout file {}", g.layout_id, l.id));
            }
        }
        for (name, record) in &g.objects {
            if let Some(names) = &object_names {
                if !names.contains(name.as_str()) {
                    r.push(src, Some(name), "not part of the layout");
                }
            }
            let Some(trials) = record.trials() else { continue };
            if trials.len() != t {
                r.push(src, Some(name), format!("has {} trials, expected {t}", trials.len()));
            }
            if let Some(h) = refs.hand {
                for (i, trial) in trials.iter().enumerate() {
                    if trial.hand_ref != h.name {
                        r.push(src, Some(name), format!("trial {} uses hand '{}', loaded hand is '{}'", i + 1, trial.hand_ref, h.name));
                    }
                    for (joint, _) in &trial.pregrasp {
                        if h.joint(joint).is_none() {
                            r.push(src, Some(name), format!("trial {} sets unknown joint '{joint}'", i + 1));
                        }
                    }
                }
            }
        }
    }

    if let Some(e) = refs.execution {
        let src = "execution log";
        if e.modality != config.modality {
            r.push(src, None, format!("modality {} differs from configured {}", e.modality, config.modality));
        }
        if let Some(l) = refs.layout {
            if e.layout_id != l.id {
                r.push(src, None, format!("layout {} does not match layout file {}", e.layout_id, l.id));
            }
        }
        let n_obj = refs.layout.map(|l| l.object_count());
        for (name, record) in &e.objects {
            if let Some(names) = &object_names {
                if !names.contains(name.as_str()) {
                    r.push(src, Some(name), "not part of the layout");
                }
            }
            if let Some(g) = refs.grasps {
                match (g.objects.get(name), record) {
                    (None, _) => r.push(src, Some(name), "has no entry in the grasp set"),
                    (Some(ObjectRecord::NoData), ObjectRecord::Trials(_)) | (Some(ObjectRecord::Trials(_)), ObjectRecord::NoData) => {
                        r.push(src, Some(name), "no_data marking disagrees with the grasp set")
                    }
                    _ => {}
                }
            }
            let Some(trials) = record.trials() else { continue };
            if trials.len() != t {
                r.push(src, Some(name), format!("has {} trials, expected {t}", trials.len()));
            }
            if e.modality == Modality::Clutter {
                if let Some(n) = n_obj {
                    for (i, trial) in trials.iter().enumerate() {
                        if let Some(h) = trial.objects_hit {
                            if h as usize + 1 > n {
                                r.push(src, Some(name), format!("trial {} hits {h} objects, at most {} possible", i + 1, n - 1));
                            }
                        }
                    }
                }
            }
        }
        if let Some(g) = refs.grasps {
            for name in g.objects.keys() {
                if !e.objects.contains_key(name) {
                    r.push(src, Some(name), "in the grasp set but missing from the execution log");
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{GraspTrial, NamedPose, ReachEntry, ReachSource, TrialOutcome};
    use crate::se3::Pose;
    use std::collections::BTreeMap;

    fn outcome() -> TrialOutcome {
        TrialOutcome {
            grasped: true,
            waypoints_reached: 5,
            objects_hit: None,
        }
    }

    #[test]
    fn missing_trial_names_object() {
        let mut objects = BTreeMap::new();
        objects.insert("mustard_bottle".to_string(), ObjectRecord::Trials(vec![outcome(); 4]));
        let log = ExecutionLog {
            layout_id: 0,
            modality: Modality::Isolation,
            objects,
        };
        let refs = DatasetRefs {
            execution: Some(&log),
            ..Default::default()
        };
        let report = validate_dataset(&refs, &BenchmarkConfig::default());
        assert!(!report.is_runnable());
        assert!(report.to_string().contains("mustard_bottle"), "{report}");
        assert!(report.to_string().contains("4 trials, expected 5"), "{report}");
    }

    #[test]
    fn stray_reach_entry_and_modality_mismatch() {
        let set = PoseSet {
            set_id: 0,
            poses: vec![NamedPose {
                name: "p1".into(),
                pose: Pose::identity(),
            }],
        };
        let mut entries = BTreeMap::new();
        entries.insert("p1".to_string(), ReachEntry::Unreached);
        entries.insert("ghost".to_string(), ReachEntry::Unreached);
        let log = ReachLog {
            set_id: 0,
            source: ReachSource::ForwardKinematics,
            entries,
        };
        let exec = ExecutionLog {
            layout_id: 0,
            modality: Modality::Clutter,
            objects: BTreeMap::new(),
        };
        let refs = DatasetRefs {
            pose_sets: vec![&set],
            reach_logs: vec![&log],
            execution: Some(&exec),
            ..Default::default()
        };
        let report = validate_dataset(&refs, &BenchmarkConfig::default());
        assert_eq!(report.findings.len(), 2, "{report}");
        assert!(report.to_string().contains("ghost"));
        assert!(report.to_string().contains("modality"));
    }

    #[test]
    fn grasp_and_execution_objects_agree() {
        let trial = GraspTrial {
            pose: Pose::identity(),
            pregrasp: vec![],
            hand_ref: "h".into(),
        };
        let mut g = BTreeMap::new();
        g.insert("a".to_string(), ObjectRecord::Trials(vec![trial; 5]));
        let grasps = GraspSet {
            layout_id: 0,
            objects: g,
        };
        let exec = ExecutionLog {
            layout_id: 0,
            modality: Modality::Isolation,
            objects: BTreeMap::new(),
        };
        let refs = DatasetRefs {
            grasps: Some(&grasps),
            execution: Some(&exec),
            ..Default::default()
        };
        let report = validate_dataset(&refs, &BenchmarkConfig::default());
        assert_eq!(report.findings.len(), 1);
        assert_eq!(report.findings[0].object.as_deref(), Some("a"));
    }
}
