//! Intermediate products of the staged workflow. Each stage can be computed
//! from raw inputs or read back from its XML cache file; `report` accepts
//! either.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use crate::data::read_text;
use crate::data::xml::{fmt_num, fmt_pose, parse_document, Elem, XmlWriter};
use crate::data::{
    BenchmarkConfig, DataError, ExecutionLog, GraspSet, HandModel, Layout, Modality, ObjectRecord, PoseSet, ReachLog,
    TriMesh,
};
use crate::execution::{object_execution, stability_waypoints, ExecutionError};
use crate::platform::{graspability, object_region_scores, score_regions, PlatformError, RegionScore};
use crate::scorecard::{Flags, LayoutScore, ObjectInputs, ObjectScoreRow, TrialScores};
use crate::se3::{Pose, RegionGrid, RegionId};
use crate::wrench::{object_quality, ObjectModel, QualitySettings, WrenchError};

fn opt_attr(attrs: &mut Vec<(&'static str, String)>, key: &'static str, v: Option<f64>) {
    if let Some(v) = v {
        attrs.push((key, fmt_num(v)));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatformObject {
    pub s0: f64,
    pub s1: Option<f64>,
    pub s2: bool,
    pub regions: Vec<RegionId>,
    pub payload_ok: bool,
    pub aperture_ok: bool,
    /// Justification of a layout graspability override.
    pub override_note: Option<String>,
}

/// S0, S1 and S2 of one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatformStage {
    pub layout_id: u8,
    pub uses_vision: bool,
    pub reach: Vec<RegionScore>,
    pub calibration: Option<Vec<RegionScore>>,
    pub objects: BTreeMap<String, PlatformObject>,
}

/// Raw platform inputs of one layout.
pub struct PlatformInputs<'a> {
    pub layout: &'a Layout,
    pub meshes: &'a BTreeMap<String, TriMesh>,
    pub hand: &'a HandModel,
    pub poses: &'a PoseSet,
    pub reach_log: &'a ReachLog,
    /// Required when the pipeline uses vision.
    pub calibration_log: Option<&'a ReachLog>,
}

pub fn platform_stage(inputs: &PlatformInputs, config: &BenchmarkConfig) -> Result<PlatformStage, PlatformError> {
    let grid = &inputs.layout.grid;
    let reach = score_regions(inputs.poses, inputs.reach_log, config.reach, grid)?;
    let calibration = match (config.uses_vision, inputs.calibration_log) {
        (true, Some(log)) => Some(score_regions(inputs.poses, log, config.calibration, grid)?),
        (true, None) => {
            log::warn!("pipeline uses vision but no calibration log was given, S1 reported as 0");
            Some(
                grid.region_ids()
                    .map(|region| RegionScore {
                        region,
                        n_reached: 0,
                        n_total: 0,
                        score: 0.0,
                    })
                    .collect(),
            )
        }
        (false, _) => None,
    };
    let s0 = object_region_scores(inputs.layout, inputs.meshes, &reach)?;
    let s1 = match &calibration {
        Some(c) => Some(object_region_scores(inputs.layout, inputs.meshes, c)?),
        None => None,
    };
    let mut objects = BTreeMap::new();
    for obj in &inputs.layout.objects {
        let g = graspability(obj, inputs.hand);
        let r0 = &s0[&obj.name];
        objects.insert(
            obj.name.clone(),
            PlatformObject {
                s0: r0.score,
                s1: s1.as_ref().map(|m| m[&obj.name].score),
                s2: g.score,
                regions: r0.regions.clone(),
                payload_ok: g.payload_ok,
                aperture_ok: g.aperture_ok,
                override_note: g.overridden,
            },
        );
    }
    Ok(PlatformStage {
        layout_id: inputs.layout.id,
        uses_vision: config.uses_vision,
        reach,
        calibration,
        objects,
    })
}

fn regions_xml(w: &mut XmlWriter, source: &str, scores: &[RegionScore]) {
    w.open("regions", &[("source", source.to_string())]);
    for r in scores {
        w.empty(
            "region",
            &[
                ("id", r.region.0.to_string()),
                ("reached", r.n_reached.to_string()),
                ("total", r.n_total.to_string()),
            ],
        );
    }
    w.close("regions");
}

fn parse_regions(e: &Elem) -> Result<Vec<RegionScore>, DataError> {
    e.allow_attrs(&["source"])?;
    e.allow_children(&["region"])?;
    let grid = RegionGrid::graspa();
    e.children_named("region")
        .map(|r| {
            r.allow_attrs(&["id", "reached", "total"])?;
            let id: u8 = r.req_parse_attr("id")?;
            if id == 0 || id as usize > grid.region_count() {
                return Err(r.semantic(format!("region id {id} out of range")));
            }
            let n_reached: usize = r.req_parse_attr("reached")?;
            let n_total: usize = r.req_parse_attr("total")?;
            if n_reached > n_total {
                return Err(r.semantic("more poses reached than recorded"));
            }
            Ok(RegionScore {
                region: RegionId(id),
                n_reached,
                n_total,
                score: if n_total == 0 { 0.0 } else { n_reached as f64 / n_total as f64 },
            })
        })
        .collect()
}

impl PlatformStage {
    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open(
            "platform",
            &[("layout", self.layout_id.to_string()), ("uses_vision", self.uses_vision.to_string())],
        );
        regions_xml(&mut w, "kinematics", &self.reach);
        if let Some(c) = &self.calibration {
            regions_xml(&mut w, "vision", c);
        }
        for (name, o) in &self.objects {
            let mut attrs = vec![("name", name.clone()), ("s0", fmt_num(o.s0))];
            opt_attr(&mut attrs, "s1", o.s1);
            attrs.push(("s2", o.s2.to_string()));
            attrs.push(("payload_ok", o.payload_ok.to_string()));
            attrs.push(("aperture_ok", o.aperture_ok.to_string()));
            attrs.push((
                "regions",
                o.regions.iter().map(|r| r.0.to_string()).collect::<Vec<_>>().join(" "),
            ));
            match &o.override_note {
                Some(n) => w.leaf("object", &attrs, n),
                None => w.empty("object", &attrs),
            }
        }
        w.close("platform");
        w.finish()
    }

    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "platform")?;
        root.allow_attrs(&["layout", "uses_vision"])?;
        root.allow_children(&["regions", "object"])?;
        let uses_vision = root
            .bool_attr("uses_vision")?
            .ok_or_else(|| root.schema("missing attribute 'uses_vision'"))?;
        let mut reach = None;
        let mut calibration = None;
        for r in root.children_named("regions") {
            let slot = match r.req_attr("source")? {
                "kinematics" => &mut reach,
                "vision" => &mut calibration,
                other => return Err(r.schema(format!("unknown region source '{other}'"))),
            };
            if slot.replace(parse_regions(&r)?).is_some() {
                return Err(r.schema("duplicate region block"));
            }
        }
        let mut objects = BTreeMap::new();
        for o in root.children_named("object") {
            o.allow_attrs(&["name", "s0", "s1", "s2", "payload_ok", "aperture_ok", "regions"])?;
            let regions = o
                .req_attr("regions")?
                .split_whitespace()
                .map(|t| t.parse().map(RegionId).map_err(|_| o.schema(format!("invalid region '{t}'"))))
                .collect::<Result<Vec<_>, _>>()?;
            let req_bool = |k: &str| o.bool_attr(k)?.ok_or_else(|| o.schema(format!("missing attribute '{k}'")));
            let note = o.text();
            let obj = PlatformObject {
                s0: o.req_parse_attr("s0")?,
                s1: o.parse_attr("s1")?,
                s2: req_bool("s2")?,
                regions,
                payload_ok: req_bool("payload_ok")?,
                aperture_ok: req_bool("aperture_ok")?,
                override_note: (!note.is_empty()).then(|| note.to_string()),
            };
            let name = o.req_attr("name")?.to_string();
            if objects.insert(name.clone(), obj).is_some() {
                return Err(o.semantic(format!("duplicate object '{name}'")));
            }
        }
        Ok(PlatformStage {
            layout_id: root.req_parse_attr("layout")?,
            uses_vision,
            reach: reach.ok_or_else(|| root.schema("missing kinematics regions"))?,
            calibration,
            objects,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        Self::parse_str(&read_text(path)?, &path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityTrial {
    pub s3: f64,
    pub mean_epsilon: Option<f64>,
    /// Perturbations rejected for penetrating the object at pregrasp.
    pub penetrations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityObject {
    pub ows_radius: Option<f64>,
    pub centroid_fallback: bool,
    pub trials: Vec<QualityTrial>,
}

/// S3 per object and trial; `None` marks objects without grasps.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityStage {
    pub layout_id: u8,
    pub objects: BTreeMap<String, Option<QualityObject>>,
}

/// Grasp quality of every object with planned grasps, in parallel.
pub fn quality_stage(
    layout: &Layout,
    meshes: &BTreeMap<String, TriMesh>,
    grasps: &GraspSet,
    hand: &HandModel,
    settings: &QualitySettings,
) -> Result<QualityStage, WrenchError> {
    let objects = grasps
        .objects
        .par_iter()
        .map(|(name, record)| {
            let ObjectRecord::Trials(trials) = record else {
                return Ok((name.clone(), None));
            };
            let (Some(obj), Some(mesh)) = (layout.object(name), meshes.get(name)) else {
                return Err(WrenchError::DegenerateMesh(format!("object '{name}' has no mesh in the layout")));
            };
            let model = ObjectModel::new(mesh.clone(), obj.pose);
            let q = object_quality(trials, &model, hand, settings)?;
            if mesh.centroid_fallback {
                log::warn!("object '{name}': open mesh, center of mass approximated by the vertex centroid");
            }
            let trials = q
                .trials
                .iter()
                .map(|t| QualityTrial {
                    s3: t.s3,
                    mean_epsilon: Some(t.mean_epsilon),
                    penetrations: t.perturbations.iter().filter(|p| p.initial_penetration).count(),
                })
                .collect();
            Ok((
                name.clone(),
                Some(QualityObject {
                    ows_radius: Some(q.ows_radius),
                    centroid_fallback: mesh.centroid_fallback,
                    trials,
                }),
            ))
        })
        .collect::<Result<BTreeMap<_, _>, WrenchError>>()?;
    Ok(QualityStage {
        layout_id: layout.id,
        objects,
    })
}

impl QualityStage {
    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open("quality", &[("layout", self.layout_id.to_string())]);
        for (name, o) in &self.objects {
            let Some(o) = o else {
                w.empty("object", &[("name", name.clone()), ("no_data", "true".into())]);
                continue;
            };
            let mut attrs = vec![("name", name.clone())];
            opt_attr(&mut attrs, "ows_radius", o.ows_radius);
            if o.centroid_fallback {
                attrs.push(("centroid_fallback", "true".into()));
            }
            w.open("object", &attrs);
            for t in &o.trials {
                let mut attrs = vec![("s3", fmt_num(t.s3))];
                opt_attr(&mut attrs, "mean_epsilon", t.mean_epsilon);
                attrs.push(("penetrations", t.penetrations.to_string()));
                w.empty("trial", &attrs);
            }
            w.close("object");
        }
        w.close("quality");
        w.finish()
    }

    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "quality")?;
        root.allow_attrs(&["layout"])?;
        root.allow_children(&["object"])?;
        let mut objects = BTreeMap::new();
        for o in root.children_named("object") {
            o.allow_attrs(&["name", "no_data", "ows_radius", "centroid_fallback"])?;
            o.allow_children(&["trial"])?;
            let name = o.req_attr("name")?.to_string();
            let entry = if o.bool_attr("no_data")?.unwrap_or(false) {
                None
            } else {
                let trials = o
                    .children_named("trial")
                    .map(|t| {
                        t.allow_attrs(&["s3", "mean_epsilon", "penetrations"])?;
                        let s3: f64 = t.req_parse_attr("s3")?;
                        if !(0.0..=1.0).contains(&s3) {
                            return Err(t.semantic(format!("S3 must lie in [0, 1], got {s3}")));
                        }
                        Ok(QualityTrial {
                            s3,
                            mean_epsilon: t.parse_attr("mean_epsilon")?,
                            penetrations: t.parse_attr("penetrations")?.unwrap_or(0),
                        })
                    })
                    .collect::<Result<Vec<_>, DataError>>()?;
                Some(QualityObject {
                    ows_radius: o.parse_attr("ows_radius")?,
                    centroid_fallback: o.bool_attr("centroid_fallback")?.unwrap_or(false),
                    trials,
                })
            };
            if objects.insert(name.clone(), entry).is_some() {
                return Err(o.semantic(format!("duplicate object '{name}'")));
            }
        }
        Ok(QualityStage {
            layout_id: root.req_parse_attr("layout")?,
            objects,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        Self::parse_str(&read_text(path)?, &path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrial {
    pub s4: f64,
    pub s5: f64,
    pub s6: Option<f64>,
    /// Stability waypoints of the trial's grasp, when the grasp is known.
    pub waypoints: Vec<Pose>,
}

/// S4, S5 and S6 per object and trial; `None` marks objects without data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionStage {
    pub layout_id: u8,
    pub modality: Modality,
    pub objects: BTreeMap<String, Option<Vec<ExecutionTrial>>>,
}

/// Scores every object of the log; waypoints come from `grasps` if given.
pub fn execution_stage(
    log: &ExecutionLog,
    grasps: Option<&GraspSet>,
    config: &BenchmarkConfig,
    n_obj: usize,
) -> Result<ExecutionStage, ExecutionError> {
    let mut objects = BTreeMap::new();
    for (name, record) in &log.objects {
        if matches!(record, ObjectRecord::NoData) {
            objects.insert(name.clone(), None);
            continue;
        }
        let e = object_execution(log, name, config.trials, n_obj)?;
        let poses: Vec<Pose> = grasps
            .and_then(|g| g.objects.get(name))
            .and_then(|r| r.trials())
            .map(|t| t.iter().map(|t| t.pose).collect())
            .unwrap_or_default();
        let trials = (0..e.s4.len())
            .map(|t| ExecutionTrial {
                s4: e.s4[t],
                s5: e.s5[t],
                s6: e.s6.as_ref().map(|v| v[t]),
                waypoints: poses
                    .get(t)
                    .map(|p| stability_waypoints(p, &config.approach_axis, config.lift_height()).waypoints.to_vec())
                    .unwrap_or_default(),
            })
            .collect();
        objects.insert(name.clone(), Some(trials));
    }
    Ok(ExecutionStage {
        layout_id: log.layout_id,
        modality: log.modality,
        objects,
    })
}

impl ExecutionStage {
    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open(
            "execution",
            &[("layout", self.layout_id.to_string()), ("modality", self.modality.to_string())],
        );
        for (name, trials) in &self.objects {
            let Some(trials) = trials else {
                w.empty("object", &[("name", name.clone()), ("no_data", "true".into())]);
                continue;
            };
            w.open("object", &[("name", name.clone())]);
            for t in trials {
                let mut attrs = vec![("s4", fmt_num(t.s4)), ("s5", fmt_num(t.s5))];
                opt_attr(&mut attrs, "s6", t.s6);
                if t.waypoints.is_empty() {
                    w.empty("trial", &attrs);
                    continue;
                }
                w.open("trial", &attrs);
                for (i, p) in t.waypoints.iter().enumerate() {
                    w.leaf("waypoint", &[("index", (i + 1).to_string())], &fmt_pose(p));
                }
                w.close("trial");
            }
            w.close("object");
        }
        w.close("execution");
        w.finish()
    }

    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "execution")?;
        root.allow_attrs(&["layout", "modality"])?;
        root.allow_children(&["object"])?;
        let unit = |e: &Elem, k: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(e.semantic(format!("{k} must lie in [0, 1], got {v}")))
            }
        };
        let mut objects = BTreeMap::new();
        for o in root.children_named("object") {
            o.allow_attrs(&["name", "no_data"])?;
            o.allow_children(&["trial"])?;
            let name = o.req_attr("name")?.to_string();
            let entry = if o.bool_attr("no_data")?.unwrap_or(false) {
                None
            } else {
                let trials = o
                    .children_named("trial")
                    .map(|t| {
                        t.allow_attrs(&["s4", "s5", "s6"])?;
                        t.allow_children(&["waypoint"])?;
                        let s4 = t.req_parse_attr("s4")?;
                        if s4 != 0.0 && s4 != 1.0 {
                            return Err(t.semantic(format!("S4 must be 0 or 1, got {s4}")));
                        }
                        let s6 = match t.parse_attr::<f64>("s6")? {
                            Some(v) => Some(unit(&t, "S6", v)?),
                            None => None,
                        };
                        let waypoints = t
                            .children_named("waypoint")
                            .map(|p| {
                                p.allow_attrs(&["index"])?;
                                p.pose()
                            })
                            .collect::<Result<Vec<_>, DataError>>()?;
                        Ok(ExecutionTrial {
                            s4,
                            s5: unit(&t, "S5", t.req_parse_attr("s5")?)?,
                            s6,
                            waypoints,
                        })
                    })
                    .collect::<Result<Vec<_>, DataError>>()?;
                Some(trials)
            };
            if objects.insert(name.clone(), entry).is_some() {
                return Err(o.semantic(format!("duplicate object '{name}'")));
            }
        }
        Ok(ExecutionStage {
            layout_id: root.req_parse_attr("layout")?,
            modality: root.req_parse_attr("modality")?,
            objects,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        Self::parse_str(&read_text(path)?, &path.display().to_string())
    }
}

/// Joins the three stages into scorecard inputs, in layout order. An object
/// has trial data only when both quality and execution data exist.
pub fn scorecard_inputs(
    layout: &Layout,
    platform: &PlatformStage,
    quality: &QualityStage,
    execution: &ExecutionStage,
) -> Vec<ObjectInputs> {
    layout
        .objects
        .iter()
        .filter_map(|obj| {
            let Some(p) = platform.objects.get(&obj.name) else {
                log::warn!("object '{}' missing from the platform scores", obj.name);
                return None;
            };
            let q = quality.objects.get(&obj.name).and_then(Option::as_ref);
            let e = execution.objects.get(&obj.name).and_then(Option::as_ref);
            let trials = match (q, e) {
                (Some(q), Some(e)) => Some(TrialScores {
                    s3: q.trials.iter().map(|t| t.s3).collect(),
                    s4: e.iter().map(|t| t.s4).collect(),
                    s5: e.iter().map(|t| t.s5).collect(),
                    s6: e.iter().map(|t| t.s6).collect(),
                }),
                _ => None,
            };
            Some(ObjectInputs {
                name: obj.name.clone(),
                s0: p.s0,
                s1: p.s1,
                s2: p.s2,
                trials,
            })
        })
        .collect()
}

impl LayoutScore {
    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        let mut attrs = vec![
            ("layout", self.layout_id.to_string()),
            ("modality", self.modality.to_string()),
            ("eligible", self.m_eligible.to_string()),
        ];
        opt_attr(&mut attrs, "final", self.final_score);
        opt_attr(&mut attrs, "published", self.published_score);
        w.open("scorecard", &attrs);
        for r in &self.rows {
            let mut attrs = vec![("name", r.name.clone()), ("s0", fmt_num(r.s0))];
            opt_attr(&mut attrs, "s1", r.s1);
            attrs.push(("s2", r.s2.to_string()));
            opt_attr(&mut attrs, "s3", r.s3);
            opt_attr(&mut attrs, "s4", r.s4);
            opt_attr(&mut attrs, "s5", r.s5);
            opt_attr(&mut attrs, "s6", r.s6);
            opt_attr(&mut attrs, "final", r.final_score);
            attrs.push(("flags", r.flags.labels().join(" ")));
            w.empty("row", &attrs);
        }
        w.close("scorecard");
        w.finish()
    }

    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "scorecard")?;
        root.allow_attrs(&["layout", "modality", "eligible", "final", "published"])?;
        root.allow_children(&["row"])?;
        let rows = root
            .children_named("row")
            .map(|r| {
                r.allow_attrs(&["name", "s0", "s1", "s2", "s3", "s4", "s5", "s6", "final", "flags"])?;
                let mut flags = Flags::default();
                for f in r.attr("flags").unwrap_or("").split_whitespace() {
                    match f {
                        "low_reach" => flags.low_reach = true,
                        "low_calib" => flags.low_calib = true,
                        "ungraspable" => flags.ungraspable = true,
                        "no_data" => flags.no_data = true,
                        other => return Err(r.schema(format!("unknown flag '{other}'"))),
                    }
                }
                Ok(ObjectScoreRow {
                    name: r.req_attr("name")?.to_string(),
                    s0: r.req_parse_attr("s0")?,
                    s1: r.parse_attr("s1")?,
                    s2: r.bool_attr("s2")?.ok_or_else(|| r.schema("missing attribute 's2'"))?,
                    s3: r.parse_attr("s3")?,
                    s4: r.parse_attr("s4")?,
                    s5: r.parse_attr("s5")?,
                    s6: r.parse_attr("s6")?,
                    final_score: r.parse_attr("final")?,
                    flags,
                })
            })
            .collect::<Result<Vec<_>, DataError>>()?;
        Ok(LayoutScore {
            layout_id: root.req_parse_attr("layout")?,
            modality: root.req_parse_attr("modality")?,
            m_eligible: root.req_parse_attr("eligible")?,
            final_score: root.parse_attr("final")?,
            published_score: root.parse_attr("published")?,
            rows,
        })
    }
}
