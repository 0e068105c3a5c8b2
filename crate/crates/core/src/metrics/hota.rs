use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::MatchCriterion;
use crate::assignment;
use crate::error::{Error, Result};
use crate::mot_io::{TrackRecord, TrackSet};

/// Localization thresholds 0.05, 0.10, ..., 0.95.
pub fn default_alphas() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotaAlpha {
    pub alpha: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub da: f64,
    pub aa: f64,
    pub la: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotaReport {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub la: f64,
    pub per_alpha: Vec<HotaAlpha>,
    /// No true positive at any threshold; every component is 0.
    pub degenerate: bool,
}

/// HOTA components over the localization thresholds `alphas`.
///
/// At each threshold a pair may match when its similarity under `criterion`
/// is at least the threshold; each frame is matched for maximum cardinality,
/// then maximum total similarity. Association accuracy is averaged per
/// matched detection and localization accuracy is the mean similarity of
/// matches. The combined score is the geometric mean of `DA * AA * LA` over
/// thresholds, cube-rooted.
pub fn hota_suite(gt: &TrackSet, pred: &TrackSet, criterion: MatchCriterion, alphas: &[f64]) -> Result<HotaReport> {
    if alphas.is_empty() {
        return Err(Error::invalid("HOTA needs at least one threshold"));
    }
    if alphas.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
        return Err(Error::invalid("HOTA thresholds must lie in (0, 1]"));
    }
    let gt_frames = gt.by_frame();
    let pred_frames = pred.by_frame();
    let frames: BTreeSet<u32> = gt_frames.keys().chain(pred_frames.keys()).copied().collect();
    let gt_len: BTreeMap<u32, usize> = gt.by_id().into_iter().map(|(id, r)| (id, r.len())).collect();
    let pred_len: BTreeMap<u32, usize> = pred.by_id().into_iter().map(|(id, r)| (id, r.len())).collect();
    let empty: Vec<TrackRecord> = Vec::new();

    let mut per_alpha = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut matches: Vec<(u32, u32, f64)> = Vec::new();
        for frame in &frames {
            let gts = gt_frames.get(frame).unwrap_or(&empty);
            let preds = pred_frames.get(frame).unwrap_or(&empty);
            let sim: Vec<Vec<f64>> = gts.iter().map(|g| preds.iter().map(|p| criterion.similarity(g, p)).collect()).collect();
            let cost: Vec<Vec<Option<f64>>> = sim
                .iter()
                .map(|row| row.iter().map(|s| (*s >= alpha).then_some(1.0 - s)).collect())
                .collect();
            for (gi, pi) in assignment::max_cardinality_min_cost(&cost) {
                matches.push((gts[gi].id, preds[pi].id, sim[gi][pi]));
            }
        }
        let tp = matches.len();
        let fn_ = gt.len() - tp;
        let fp = pred.len() - tp;
        let mut tpa: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for (g, p, _) in &matches {
            *tpa.entry((*g, *p)).or_insert(0) += 1;
        }
        let (mut aa_sum, mut la_sum) = (0.0, 0.0);
        for (g, p, s) in &matches {
            let t = tpa[&(*g, *p)];
            aa_sum += t as f64 / (gt_len[g] + pred_len[p] - t) as f64;
            la_sum += s;
        }
        let (da, aa, la) = if tp == 0 {
            (0.0, 0.0, 0.0)
        } else {
            (tp as f64 / (tp + fn_ + fp) as f64, aa_sum / tp as f64, la_sum / tp as f64)
        };
        per_alpha.push(HotaAlpha { alpha, tp, fp, fn_, da, aa, la });
    }

    let k = per_alpha.len() as f64;
    let product: f64 = per_alpha.iter().map(|a| a.da * a.aa * a.la).product();
    let mean = |f: fn(&HotaAlpha) -> f64| per_alpha.iter().map(f).sum::<f64>() / k;
    Ok(HotaReport {
        hota: product.powf(1.0 / (3.0 * k)),
        deta: mean(|a| a.da),
        assa: mean(|a| a.aa),
        la: mean(|a| a.la),
        degenerate: per_alpha.iter().all(|a| a.tp == 0),
        per_alpha,
    })
}
