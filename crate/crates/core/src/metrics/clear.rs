use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::IdMapping;
use crate::assignment;
use crate::error::{Error, Result};
use crate::mot_io::{TrackRecord, TrackSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub frame: u32,
    pub gt: usize,
    pub pred: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub idsw: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub frames: Vec<FrameCounts>,
    pub gt: usize,
    pub pred: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub idsw: usize,
    /// Matched `(frame, gt id, pred id)` triples in frame then gt-id order.
    pub matches: Vec<(u32, u32, u32)>,
}

/// Per-frame association between ground truth and predictions.
///
/// A ground-truth object keeps its previous partner while that partner is
/// still within the criterion; otherwise it tries its globally mapped id.
/// Remaining objects are paired by a maximum-cardinality assignment that
/// prefers more similar pairs. An id switch is counted whenever an object's
/// partner differs from the one it had when last matched.
pub fn frame_confusion(gt: &TrackSet, pred: &TrackSet, mapping: &IdMapping) -> ConfusionCounts {
    let criterion = mapping.criterion;
    let preferred = mapping.gt_to_pred();
    let gt_frames = gt.by_frame();
    let pred_frames = pred.by_frame();
    let frames: BTreeSet<u32> = gt_frames.keys().chain(pred_frames.keys()).copied().collect();
    let mut last: BTreeMap<u32, u32> = BTreeMap::new();
    let mut out = ConfusionCounts::default();
    let empty: Vec<TrackRecord> = Vec::new();

    for frame in frames {
        let gts = gt_frames.get(&frame).unwrap_or(&empty);
        let preds = pred_frames.get(&frame).unwrap_or(&empty);
        let mut gt_partner: Vec<Option<usize>> = vec![None; gts.len()];
        let mut pred_used = vec![false; preds.len()];

        for (gi, g) in gts.iter().enumerate() {
            let want = last.get(&g.id).or_else(|| preferred.get(&g.id));
            let Some(&want) = want else { continue };
            if let Some(pi) = preds.iter().position(|p| p.id == want) {
                if !pred_used[pi] && criterion.accepts(g, &preds[pi]) {
                    gt_partner[gi] = Some(pi);
                    pred_used[pi] = true;
                }
            }
        }

        let free_g: Vec<usize> = (0..gts.len()).filter(|&i| gt_partner[i].is_none()).collect();
        let free_p: Vec<usize> = (0..preds.len()).filter(|&i| !pred_used[i]).collect();
        let cost: Vec<Vec<Option<f64>>> = free_g
            .iter()
            .map(|&gi| {
                free_p
                    .iter()
                    .map(|&pi| {
                        let (g, p) = (&gts[gi], &preds[pi]);
                        criterion.accepts(g, p).then(|| 1.0 - criterion.similarity(g, p))
                    })
                    .collect()
            })
            .collect();
        for (r, c) in assignment::max_cardinality_min_cost(&cost) {
            gt_partner[free_g[r]] = Some(free_p[c]);
        }

        let mut counts = FrameCounts { frame, gt: gts.len(), pred: preds.len(), ..Default::default() };
        for (gi, partner) in gt_partner.iter().enumerate() {
            let Some(pi) = *partner else { continue };
            let (gid, pid) = (gts[gi].id, preds[pi].id);
            counts.tp += 1;
            if last.insert(gid, pid).is_some_and(|prev| prev != pid) {
                counts.idsw += 1;
            }
            out.matches.push((frame, gid, pid));
        }
        counts.fp = counts.pred - counts.tp;
        counts.fn_ = counts.gt - counts.tp;
        out.gt += counts.gt;
        out.pred += counts.pred;
        out.tp += counts.tp;
        out.fp += counts.fp;
        out.fn_ += counts.fn_;
        out.idsw += counts.idsw;
        out.frames.push(counts);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub precision: f64,
    pub recall: f64,
    /// Set when a denominator was zero and the rate was defined as 0.
    pub undefined: bool,
}

pub fn precision_recall(c: &ConfusionCounts) -> Rates {
    let ratio = |num: usize, den: usize| if den == 0 { None } else { Some(num as f64 / den as f64) };
    let p = ratio(c.tp, c.tp + c.fp);
    let r = ratio(c.tp, c.tp + c.fn_);
    Rates {
        precision: p.unwrap_or(0.0),
        recall: r.unwrap_or(0.0),
        undefined: p.is_none() || r.is_none(),
    }
}

pub fn mota(c: &ConfusionCounts) -> Result<f64> {
    if c.gt == 0 {
        return Err(Error::invalid("MOTA is undefined without ground-truth objects"));
    }
    Ok(1.0 - (c.fn_ + c.fp + c.idsw) as f64 / c.gt as f64)
}
