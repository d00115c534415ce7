//! Eligibility filtering, per-object and per-layout composite scores, and
//! the rendered scorecard.

mod render;
mod report;

use thiserror::Error;

use crate::data::{BenchmarkConfig, EligibilityRule, Layout, Modality};

pub use render::{render_layout, Overlays};
pub use report::{emit_report, ReportFormat, DISCREPANCY_TOLERANCE};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ScoreError {
    #[error("per-trial vectors differ in length: {0}")]
    LengthMismatch(String),
    #[error("clutter modality needs per-trial obstacle scores")]
    MissingObstacleScores,
}

/// Per-trial scores of one object, index t = trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScores {
    pub s3: Vec<f64>,
    pub s4: Vec<f64>,
    pub s5: Vec<f64>,
    pub s6: Option<Vec<f64>>,
}

/// Everything the scorecard needs about one object.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectInputs {
    pub name: String,
    pub s0: f64,
    /// `None` when the pipeline does not use vision.
    pub s1: Option<f64>,
    pub s2: bool,
    /// `None` when no grasp was executed.
    pub trials: Option<TrialScores>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    pub low_reach: bool,
    pub low_calib: bool,
    pub ungraspable: bool,
    pub no_data: bool,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.low_reach || self.low_calib || self.ungraspable || self.no_data
    }

    pub fn labels(&self) -> Vec<&'static str> {
        [
            (self.low_reach, "low_reach"),
            (self.low_calib, "low_calib"),
            (self.ungraspable, "ungraspable"),
            (self.no_data, "no_data"),
        ]
        .iter()
        .filter(|(set, _)| *set)
        .map(|(_, l)| *l)
        .collect()
    }
}

/// Graspable, reachable and (with vision) well calibrated, with data.
pub fn eligibility(inputs: &ObjectInputs, rule: &EligibilityRule, uses_vision: bool) -> (bool, Flags) {
    let flags = Flags {
        low_reach: !rule.passes(inputs.s0),
        low_calib: uses_vision && !inputs.s1.is_some_and(|s| rule.passes(s)),
        ungraspable: !inputs.s2,
        no_data: inputs.trials.is_none(),
    };
    (!flags.any(), flags)
}

/// Mean over trials of the S4-gated sum: failed trials contribute nothing.
pub fn per_object_final(
    s3: &[f64],
    s4: &[f64],
    s5: &[f64],
    s6: Option<&[f64]>,
    trials: usize,
    modality: Modality,
) -> Result<f64, ScoreError> {
    let mut lengths = vec![("S3", s3.len()), ("S4", s4.len()), ("S5", s5.len())];
    let s6 = match modality {
        Modality::Isolation => None,
        Modality::Clutter => Some(s6.ok_or(ScoreError::MissingObstacleScores)?),
    };
    if let Some(v) = s6 {
        lengths.push(("S6", v.len()));
    }
    if lengths.iter().any(|(_, n)| *n != trials) {
        let detail = lengths
            .iter()
            .map(|(k, n)| format!("{k} has {n}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(ScoreError::LengthMismatch(format!("{detail}, expected {trials}")));
    }
    if trials == 0 {
        return Ok(0.0);
    }
    let total: f64 = (0..trials)
        .map(|t| (s3[t] + s5[t] + s6.map_or(0.0, |v| v[t])) * s4[t])
        .sum();
    Ok(total / trials as f64)
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectScoreRow {
    pub name: String,
    pub s0: f64,
    pub s1: Option<f64>,
    pub s2: bool,
    pub s3: Option<f64>,
    pub s4: Option<f64>,
    pub s5: Option<f64>,
    pub s6: Option<f64>,
    pub final_score: Option<f64>,
    pub flags: Flags,
}

impl ObjectScoreRow {
    pub fn eligible(&self) -> bool {
        self.final_score.is_some()
    }
}

/// Builds the row of one object; the final score is set only when eligible.
pub fn object_row(
    inputs: &ObjectInputs,
    config: &BenchmarkConfig,
    modality: Modality,
) -> Result<ObjectScoreRow, ScoreError> {
    let (eligible, flags) = eligibility(inputs, &config.eligibility, config.uses_vision);
    let t = inputs.trials.as_ref();
    let final_score = match (eligible, t) {
        (true, Some(t)) => Some(per_object_final(
            &t.s3,
            &t.s4,
            &t.s5,
            t.s6.as_deref(),
            config.trials,
            modality,
        )?),
        _ => None,
    };
    Ok(ObjectScoreRow {
        name: inputs.name.clone(),
        s0: inputs.s0,
        s1: if config.uses_vision { inputs.s1 } else { None },
        s2: inputs.s2,
        s3: t.map(|t| mean(&t.s3)),
        s4: t.map(|t| mean(&t.s4)),
        s5: t.map(|t| mean(&t.s5)),
        s6: match modality {
            Modality::Clutter => t.and_then(|t| t.s6.as_deref()).map(mean),
            Modality::Isolation => None,
        },
        final_score,
        flags,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutScore {
    pub layout_id: u8,
    pub modality: Modality,
    pub rows: Vec<ObjectScoreRow>,
    /// Number of eligible objects.
    pub m_eligible: usize,
    /// `None` when no object is eligible.
    pub final_score: Option<f64>,
    /// Reference value to compare against, if the layout carries one.
    pub published_score: Option<f64>,
}

impl LayoutScore {
    /// Difference to the published score when it exceeds `tolerance`.
    pub fn discrepancy(&self, tolerance: f64) -> Option<(f64, f64)> {
        match (self.final_score, self.published_score) {
            (Some(f), Some(p)) if (f - p).abs() > tolerance => Some((f, p)),
            _ => None,
        }
    }
}

/// Mean of the eligible rows' finals.
pub fn layout_final(layout_id: u8, modality: Modality, rows: Vec<ObjectScoreRow>) -> LayoutScore {
    let finals: Vec<f64> = rows.iter().filter_map(|r| r.final_score).collect();
    let final_score = if finals.is_empty() {
        log::warn!("layout {layout_id}: no eligible objects, composite score is N/A");
        None
    } else {
        Some(mean(&finals))
    };
    LayoutScore {
        layout_id,
        modality,
        m_eligible: finals.len(),
        rows,
        final_score,
        published_score: None,
    }
}

/// Scores every object of `layout` in layout order.
pub fn score_layout(
    layout: &Layout,
    inputs: &[ObjectInputs],
    config: &BenchmarkConfig,
) -> Result<LayoutScore, ScoreError> {
    let mut rows = Vec::with_capacity(layout.objects.len());
    for obj in &layout.objects {
        let row = match inputs.iter().find(|i| i.name == obj.name) {
            Some(i) => object_row(i, config, config.modality)?,
            None => {
                log::warn!("object '{}' has no scores, reported as N/A", obj.name);
                let missing = ObjectInputs {
                    name: obj.name.clone(),
                    s0: 0.0,
                    s1: None,
                    s2: false,
                    trials: None,
                };
                let mut row = object_row(&missing, config, config.modality)?;
                row.flags = Flags {
                    no_data: true,
                    ..Flags::default()
                };
                row
            }
        };
        rows.push(row);
    }
    let mut score = layout_final(layout.id, config.modality, rows);
    score.published_score = layout.published_score;
    Ok(score)
}
