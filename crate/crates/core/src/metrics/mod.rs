//! Tracking evaluation against ground truth.
//!
//! Detections are paired by center distance (or IoU when requested). The
//! default pairing radius is half the average ground-truth box size of the
//! video, where a box's size is the mean of its width and height.

mod clear;
mod completeness;
mod hota;
mod identity;
mod mapping;
mod margin;
mod report;

use serde::{Deserialize, Serialize};

use crate::mot_io::{TrackRecord, TrackSet};

pub use clear::{frame_confusion, mota, precision_recall, ConfusionCounts, FrameCounts, Rates};
pub use completeness::{completeness, Completeness, CompletenessReport, MISSING_MATCH};
pub use hota::{default_alphas, hota_suite, HotaAlpha, HotaReport};
pub use identity::{idf1, IdentityScores};
pub use mapping::{map_ids, IdMapping};
pub use margin::{margin_eval, MarginConfig, MarginReport};
pub use report::{
    completeness_json, evaluate_video, margin_table, metric_table, EvalConfig, MatchGeometry,
    MetricReport, VideoEvaluation,
};

/// Rule deciding whether a ground-truth and a predicted box describe the
/// same object, with a similarity score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatchCriterion {
    /// Centers at most `radius` pixels apart; similarity `1 - d / radius`.
    Center { radius: f64 },
    /// Intersection over union at least `min_iou`; similarity is the IoU.
    Iou { min_iou: f64 },
}

impl MatchCriterion {
    /// Center criterion with radius `factor` times the average gt box size.
    pub fn from_ground_truth(gt: &TrackSet, factor: f64) -> Self {
        let radius = gt.mean_box_size().unwrap_or(1.0) * factor;
        MatchCriterion::Center { radius }
    }

    pub fn accepts(&self, gt: &TrackRecord, pred: &TrackRecord) -> bool {
        match *self {
            MatchCriterion::Center { radius } => center_distance(gt, pred) <= radius,
            MatchCriterion::Iou { min_iou } => iou(gt, pred) >= min_iou,
        }
    }

    pub fn similarity(&self, gt: &TrackRecord, pred: &TrackRecord) -> f64 {
        match *self {
            MatchCriterion::Center { radius } => 1.0 - center_distance(gt, pred).min(radius) / radius,
            MatchCriterion::Iou { .. } => iou(gt, pred),
        }
    }
}

pub fn center_distance(a: &TrackRecord, b: &TrackRecord) -> f64 {
    (a.cx - b.cx).hypot(a.cy - b.cy)
}

pub fn iou(a: &TrackRecord, b: &TrackRecord) -> f64 {
    let [ax0, ay0, ax1, ay1] = a.corners();
    let [bx0, by0, bx1, by1] = b.corners();
    let w = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let h = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = w * h;
    let union = a.width() * a.height() + b.width() * b.height() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}
