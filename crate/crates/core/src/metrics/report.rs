use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{
    completeness, frame_confusion, hota_suite, idf1, map_ids, margin_eval, mota, precision_recall,
    CompletenessReport, ConfusionCounts, HotaReport, IdMapping, IdentityScores, MarginConfig,
    MarginReport, MatchCriterion,
};
use crate::error::{Error, Result};
use crate::mot_io::TrackSet;

/// How detections are paired during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatchGeometry {
    /// Center distance up to `radius_factor` times the average gt box size.
    Center { radius_factor: f64 },
    Iou { min_iou: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub geometry: MatchGeometry,
    pub alphas: Vec<f64>,
    pub margin: MarginConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            geometry: MatchGeometry::Center { radius_factor: 0.5 },
            alphas: super::default_alphas(),
            margin: MarginConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        match self.geometry {
            MatchGeometry::Center { radius_factor } if !(radius_factor > 0.0 && radius_factor.is_finite()) => {
                return Err(Error::Config(format!("radius factor must be positive, got {radius_factor}")));
            }
            MatchGeometry::Iou { min_iou } if !(min_iou > 0.0 && min_iou <= 1.0) => {
                return Err(Error::Config(format!("minimum IoU must lie in (0, 1], got {min_iou}")));
            }
            _ => {}
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
            return Err(Error::Config("HOTA thresholds must be nonempty and lie in (0, 1]".into()));
        }
        self.margin.validate()
    }

    pub fn criterion(&self, gt: &TrackSet) -> MatchCriterion {
        match self.geometry {
            MatchGeometry::Center { radius_factor } => MatchCriterion::from_ground_truth(gt, radius_factor),
            MatchGeometry::Iou { min_iou } => MatchCriterion::Iou { min_iou },
        }
    }
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub id: String,
    pub precision: f64,
    pub recall: f64,
    pub hota: f64,
    pub mota: f64,
    pub assa: f64,
    pub deta: f64,
    pub idf1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoEvaluation {
    pub metrics: MetricReport,
    pub mapping: IdMapping,
    pub confusion: ConfusionCounts,
    pub identity: IdentityScores,
    pub hota: HotaReport,
    pub margin: MarginReport,
    pub completeness: CompletenessReport,
    pub rates_undefined: bool,
}

/// Full evaluation of one prediction file against its ground truth.
pub fn evaluate_video(id: &str, gt: &TrackSet, pred: &TrackSet, cfg: &EvalConfig) -> Result<VideoEvaluation> {
    cfg.validate()?;
    if gt.is_empty() {
        return Err(Error::invalid(format!("{id}: ground truth is empty")));
    }
    let criterion = cfg.criterion(gt);
    let mapping = map_ids(gt, pred, criterion);
    let confusion = frame_confusion(gt, pred, &mapping);
    let rates = precision_recall(&confusion);
    let identity = idf1(gt, pred, &mapping)?;
    let hota = hota_suite(gt, pred, criterion, &cfg.alphas)?;
    let metrics = MetricReport {
        id: id.to_string(),
        precision: rates.precision,
        recall: rates.recall,
        hota: hota.hota,
        mota: mota(&confusion)?,
        assa: hota.assa,
        deta: hota.deta,
        idf1: identity.idf1,
    };
    Ok(VideoEvaluation {
        margin: margin_eval(gt, pred, &mapping, cfg.margin),
        completeness: completeness(gt, pred, &mapping),
        metrics,
        mapping,
        confusion,
        identity,
        hota,
        rates_undefined: rates.undefined,
    })
}

fn push_row(out: &mut String, id: &str, values: &[f64]) {
    out.push_str(id);
    for v in values {
        let _ = write!(out, ",{v:.3}");
    }
    out.push('\n');
}

fn mean_row(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n).collect()
}

/// Summary CSV with an `Average` row (arithmetic mean over videos).
pub fn metric_table(reports: &[MetricReport]) -> String {
    let mut out = String::from("ID,Precision,Recall,HOTA,MOTA,AssA,DetA,IDF1\n");
    let rows: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| vec![r.precision, r.recall, r.hota, r.mota, r.assa, r.deta, r.idf1])
        .collect();
    for (r, v) in reports.iter().zip(&rows) {
        push_row(&mut out, &r.id, v);
    }
    if !rows.is_empty() {
        push_row(&mut out, "Average", &mean_row(&rows));
    }
    out
}

pub fn margin_table(reports: &[(String, MarginReport)]) -> String {
    let mut out = String::from("ID,Within Margin,Not Within Margin,Not Identified,False Positive\n");
    let rows: Vec<Vec<f64>> = reports
        .iter()
        .map(|(_, m)| vec![m.within_margin, m.not_within_margin, m.not_identified, m.false_positive])
        .collect();
    for ((id, _), v) in reports.iter().zip(&rows) {
        push_row(&mut out, id, v);
    }
    if !rows.is_empty() {
        push_row(&mut out, "Average", &mean_row(&rows));
    }
    out
}

/// The two completeness documents `(counts, frame lists)` keyed by video.
pub fn completeness_json(reports: &[(String, CompletenessReport)]) -> (Value, Value) {
    let mut counts = Map::new();
    let mut frames = Map::new();
    for (id, r) in reports {
        counts.insert(id.clone(), r.counts_json());
        frames.insert(id.clone(), r.frames_json());
    }
    (Value::Object(counts), Value::Object(frames))
}
