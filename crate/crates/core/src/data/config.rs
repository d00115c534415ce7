use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector3;

use super::xml::{fmt_num, fmt_vec3, parse_document, Elem, XmlWriter};
use super::{read_text, DataError};
use crate::se3::Thresholds;

/// Lift height used by the success test and the stability trajectory.
pub const LIFT_HEIGHT: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Isolation,
    Clutter,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Isolation => "isolation",
            Modality::Clutter => "clutter",
        })
    }
}

impl FromStr for Modality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "isolation" => Ok(Modality::Isolation),
            "clutter" => Ok(Modality::Clutter),
            other => Err(format!("unknown modality '{other}'")),
        }
    }
}

/// Cut-off applied to S0 and S1 when selecting objects for the composite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EligibilityRule {
    pub threshold: f64,
    /// `true`: score must exceed the threshold; `false`: reaching it suffices.
    pub strict: bool,
}

impl Default for EligibilityRule {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            strict: false,
        }
    }
}

impl EligibilityRule {
    pub fn passes(&self, score: f64) -> bool {
        if self.strict {
            score > self.threshold
        } else {
            score >= self.threshold
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub robot: String,
    pub end_effector: String,
    pub modality: Modality,
    pub uses_vision: bool,
    pub reach: Thresholds,
    pub calibration: Thresholds,
    pub trials: usize,
    pub mu: f64,
    pub cone_edges: usize,
    pub perturb_dp: f64,
    pub perturb_da: f64,
    pub approach_axis: Vector3<f64>,
    pub contact_eps: f64,
    /// Finger closure increment, radians.
    pub closure_step: f64,
    pub ows_samples: usize,
    pub seed: u64,
    pub eligibility: EligibilityRule,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            robot: String::new(),
            end_effector: String::new(),
            modality: Modality::Isolation,
            uses_vision: true,
            reach: Thresholds::new(0.02, 0.5),
            calibration: Thresholds::new(0.045, 0.8),
            trials: 5,
            mu: 0.5,
            cone_edges: 8,
            perturb_dp: 0.005,
            perturb_da: 0.0873,
            approach_axis: Vector3::z(),
            contact_eps: 0.001,
            closure_step: 1f64.to_radians(),
            ows_samples: 200,
            seed: 0x6752_4153_5041,
            eligibility: EligibilityRule::default(),
        }
    }
}

impl BenchmarkConfig {
    pub fn lift_height(&self) -> f64 {
        LIFT_HEIGHT
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("reach tau_p", self.reach.position),
            ("reach tau_o", self.reach.angle),
            ("calibration tau_p", self.calibration.position),
            ("calibration tau_o", self.calibration.angle),
            ("mu", self.mu),
            ("contact_eps", self.contact_eps),
            ("closure_step", self.closure_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.reach.angle > std::f64::consts::PI || self.calibration.angle > std::f64::consts::PI {
            return Err("orientation thresholds must not exceed π".into());
        }
        if self.perturb_dp < 0.0 || self.perturb_da < 0.0 {
            return Err("perturbation sizes must be non-negative".into());
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.cone_edges < 3 {
            return Err(format!("cone_edges must be at least 3, got {}", self.cone_edges));
        }
        if self.ows_samples < 20 {
            return Err(format!("ows samples must be at least 20, got {}", self.ows_samples));
        }
        let n = self.approach_axis.norm();
        if (n - 1.0).abs() > 1e-6 {
            return Err(format!("approach_axis must be a unit vector (norm {n})"));
        }
        Ok(())
    }

    pub fn parse_str(text: &str, file: &str) -> Result<Self, DataError> {
        let doc = parse_document(file, text)?;
        let root = Elem::root(file, &doc, "config")?;
        root.allow_attrs(&[])?;
        root.allow_children(&[
            "robot",
            "end_effector",
            "modality",
            "uses_vision",
            "reach",
            "calibration",
            "trials",
            "friction",
            "perturbation",
            "lift",
            "approach_axis",
            "contact_eps",
            "closure_step",
            "ows",
            "eligibility",
        ])?;
        let mut cfg = BenchmarkConfig::default();
        if let Some(e) = root.child("robot")? {
            cfg.robot = e.text().to_string();
        }
        if let Some(e) = root.child("end_effector")? {
            cfg.end_effector = e.text().to_string();
        }
        if let Some(e) = root.child("modality")? {
            cfg.modality = e.parse_text()?;
        }
        if let Some(e) = root.child("uses_vision")? {
            cfg.uses_vision = e.bool_text()?;
        }
        let thresholds = |e: Elem| -> Result<Thresholds, DataError> {
            e.allow_attrs(&["tau_p", "tau_o"])?;
            Ok(Thresholds::new(e.req_parse_attr("tau_p")?, e.req_parse_attr("tau_o")?))
        };
        cfg.reach = thresholds(root.req_child("reach")?)?;
        cfg.calibration = thresholds(root.req_child("calibration")?)?;
        if let Some(e) = root.child("trials")? {
            cfg.trials = e.parse_text()?;
        }
        if let Some(e) = root.child("friction")? {
            e.allow_attrs(&["mu", "cone_edges"])?;
            cfg.mu = e.parse_attr("mu")?.unwrap_or(cfg.mu);
            cfg.cone_edges = e.parse_attr("cone_edges")?.unwrap_or(cfg.cone_edges);
        }
        if let Some(e) = root.child("perturbation")? {
            e.allow_attrs(&["dp", "da"])?;
            cfg.perturb_dp = e.parse_attr("dp")?.unwrap_or(cfg.perturb_dp);
            cfg.perturb_da = e.parse_attr("da")?.unwrap_or(cfg.perturb_da);
        }
        if let Some(e) = root.child("lift")? {
            let v: f64 = e.parse_text()?;
            if (v - LIFT_HEIGHT).abs() > 1e-12 {
                return Err(e.semantic(format!("lift height is fixed at {LIFT_HEIGHT} m, got {v}")));
            }
        }
        if let Some(e) = root.child("approach_axis")? {
            cfg.approach_axis = e.vector3()?;
        }
        if let Some(e) = root.child("contact_eps")? {
            cfg.contact_eps = e.parse_text()?;
        }
        if let Some(e) = root.child("closure_step")? {
            cfg.closure_step = e.parse_text()?;
        }
        if let Some(e) = root.child("ows")? {
            e.allow_attrs(&["samples", "seed"])?;
            cfg.ows_samples = e.parse_attr("samples")?.unwrap_or(cfg.ows_samples);
            cfg.seed = e.parse_attr("seed")?.unwrap_or(cfg.seed);
        }
        if let Some(e) = root.child("eligibility")? {
            e.allow_attrs(&["threshold", "strict"])?;
            cfg.eligibility.threshold = e.parse_attr("threshold")?.unwrap_or(cfg.eligibility.threshold);
            cfg.eligibility.strict = e.bool_attr("strict")?.unwrap_or(cfg.eligibility.strict);
        }
        cfg.validate().map_err(|m| root.semantic(m))?;
        Ok(cfg)
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.open("config", &[]);
        w.leaf("robot", &[], &self.robot);
        w.leaf("end_effector", &[], &self.end_effector);
        w.leaf("modality", &[], &self.modality.to_string());
        w.leaf("uses_vision", &[], &self.uses_vision.to_string());
        w.empty(
            "reach",
            &[("tau_p", fmt_num(self.reach.position)), ("tau_o", fmt_num(self.reach.angle))],
        );
        w.empty(
            "calibration",
            &[
                ("tau_p", fmt_num(self.calibration.position)),
                ("tau_o", fmt_num(self.calibration.angle)),
            ],
        );
        w.leaf("trials", &[], &self.trials.to_string());
        w.empty(
            "friction",
            &[("mu", fmt_num(self.mu)), ("cone_edges", self.cone_edges.to_string())],
        );
        w.empty(
            "perturbation",
            &[("dp", fmt_num(self.perturb_dp)), ("da", fmt_num(self.perturb_da))],
        );
        w.leaf("lift", &[], &fmt_num(LIFT_HEIGHT));
        w.leaf("approach_axis", &[], &fmt_vec3(&self.approach_axis));
        w.leaf("contact_eps", &[], &fmt_num(self.contact_eps));
        w.leaf("closure_step", &[], &fmt_num(self.closure_step));
        w.empty(
            "ows",
            &[("samples", self.ows_samples.to_string()), ("seed", self.seed.to_string())],
        );
        w.empty(
            "eligibility",
            &[
                ("threshold", fmt_num(self.eligibility.threshold)),
                ("strict", self.eligibility.strict.to_string()),
            ],
        );
        w.close("config");
        w.finish()
    }
}

pub fn parse_config(path: &Path) -> Result<BenchmarkConfig, DataError> {
    BenchmarkConfig::parse_str(&read_text(path)?, &path.display().to_string())
}
