use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{center_distance, IdMapping};
use crate::error::{Error, Result};
use crate::mot_io::TrackSet;

/// Tier radii as multiples of the average ground-truth box size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginConfig {
    pub inner: f64,
    pub outer: f64,
}

impl Default for MarginConfig {
    fn default() -> Self {
        MarginConfig { inner: 0.5, outer: 2.0 }
    }
}

impl MarginConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner > 0.0 && self.outer >= self.inner && self.outer.is_finite()) {
            return Err(Error::Config(format!(
                "margin tiers need 0 < inner <= outer, got {} and {}",
                self.inner, self.outer
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub within_margin: f64,
    pub not_within_margin: f64,
    pub not_identified: f64,
    pub false_positive: f64,
    pub gt_instances: usize,
    pub predictions: usize,
    pub average_size: f64,
}

/// Two-tier distance check of each ground-truth instance against the
/// prediction carrying its mapped id in the same frame.
///
/// With no ground truth every fraction but `not_identified` is 0 and
/// `not_identified` is 1, so the tiers still partition.
pub fn margin_eval(gt: &TrackSet, pred: &TrackSet, mapping: &IdMapping, cfg: MarginConfig) -> MarginReport {
    let avg = gt.mean_box_size().unwrap_or(0.0);
    let (inner, outer) = (cfg.inner * avg, cfg.outer * avg);
    let to_pred = mapping.gt_to_pred();
    let (mut within, mut near, mut missed) = (0usize, 0usize, 0usize);
    let mut used: BTreeSet<(u32, u32)> = BTreeSet::new();
    for g in gt.records() {
        let found = to_pred.get(&g.id).and_then(|p| pred.get(g.frame, *p));
        match found.map(|p| (p, center_distance(g, p))) {
            Some((p, d)) if d <= inner => {
                within += 1;
                used.insert((p.frame, p.id));
            }
            Some((p, d)) if d <= outer => {
                near += 1;
                used.insert((p.frame, p.id));
            }
            _ => missed += 1,
        }
    }
    let n = gt.len();
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    MarginReport {
        within_margin: frac(within),
        not_within_margin: frac(near),
        not_identified: if n == 0 { 1.0 } else { frac(missed) },
        false_positive: if pred.is_empty() {
            0.0
        } else {
            (pred.len() - used.len()) as f64 / pred.len() as f64
        },
        gt_instances: n,
        predictions: pred.len(),
        average_size: avg,
    }
}
