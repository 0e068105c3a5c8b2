use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MatchCriterion;
use crate::assignment;
use crate::mot_io::TrackSet;

/// One-to-one assignment of predicted ids to ground-truth ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdMapping {
    /// predicted id -> ground-truth id
    pub pairs: BTreeMap<u32, u32>,
    pub unmatched_pred: BTreeSet<u32>,
    pub unmatched_gt: BTreeSet<u32>,
    pub criterion: MatchCriterion,
    /// Frames in which a mapped pair co-occurs within the criterion.
    pub overlap: BTreeMap<u32, u32>,
}

impl IdMapping {
    /// ground-truth id -> predicted id
    pub fn gt_to_pred(&self) -> BTreeMap<u32, u32> {
        self.pairs.iter().map(|(p, g)| (*g, *p)).collect()
    }
}

/// Co-occurrence counts `(pred, gt) -> frames` within the criterion.
pub(crate) fn cooccurrence(gt: &TrackSet, pred: &TrackSet, criterion: &MatchCriterion) -> BTreeMap<(u32, u32), u32> {
    let gt_frames = gt.by_frame();
    let mut counts = BTreeMap::new();
    for (frame, preds) in pred.by_frame() {
        let Some(gts) = gt_frames.get(&frame) else { continue };
        for p in &preds {
            for g in gts {
                if criterion.accepts(g, p) {
                    *counts.entry((p.id, g.id)).or_insert(0) += 1;
                }
            }
        }
    }
    counts
}

/// Assigns predicted ids to ground-truth ids maximizing the total number of
/// frames in which assigned pairs co-occur within `criterion`.
pub fn map_ids(gt: &TrackSet, pred: &TrackSet, criterion: MatchCriterion) -> IdMapping {
    let gt_ids: Vec<u32> = gt.ids().into_iter().collect();
    let pred_ids: Vec<u32> = pred.ids().into_iter().collect();
    let counts = cooccurrence(gt, pred, &criterion);
    let cost: Vec<Vec<f64>> = pred_ids
        .iter()
        .map(|p| {
            gt_ids
                .iter()
                .map(|g| -(counts.get(&(*p, *g)).copied().unwrap_or(0) as f64))
                .collect()
        })
        .collect();
    let mut pairs = BTreeMap::new();
    let mut overlap = BTreeMap::new();
    for (pi, gi) in assignment::solve(&cost).into_iter().enumerate() {
        let Some(gi) = gi else { continue };
        let n = counts.get(&(pred_ids[pi], gt_ids[gi])).copied().unwrap_or(0);
        if n > 0 {
            pairs.insert(pred_ids[pi], gt_ids[gi]);
            overlap.insert(pred_ids[pi], n);
        }
    }
    let mapped_gt: BTreeSet<u32> = pairs.values().copied().collect();
    IdMapping {
        unmatched_pred: pred_ids.iter().filter(|p| !pairs.contains_key(p)).copied().collect(),
        unmatched_gt: gt_ids.iter().filter(|g| !mapped_gt.contains(g)).copied().collect(),
        pairs,
        criterion,
        overlap,
    }
}
