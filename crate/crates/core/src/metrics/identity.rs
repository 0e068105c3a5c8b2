use serde::{Deserialize, Serialize};

use super::mapping::cooccurrence;
use super::IdMapping;
use crate::error::{Error, Result};
use crate::mot_io::TrackSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityScores {
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
    pub idp: f64,
    pub idr: f64,
    pub idf1: f64,
}

/// Identity F1 under the global id mapping.
pub fn idf1(gt: &TrackSet, pred: &TrackSet, mapping: &IdMapping) -> Result<IdentityScores> {
    if gt.is_empty() && pred.is_empty() {
        return Err(Error::invalid("IDF1 is undefined for empty inputs"));
    }
    let counts = cooccurrence(gt, pred, &mapping.criterion);
    let idtp: usize = mapping
        .pairs
        .iter()
        .map(|(p, g)| counts.get(&(*p, *g)).copied().unwrap_or(0) as usize)
        .sum();
    let idfp = pred.len() - idtp;
    let idfn = gt.len() - idtp;
    let frac = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    Ok(IdentityScores {
        idtp,
        idfp,
        idfn,
        idp: frac(idtp, idtp + idfp),
        idr: frac(idtp, idtp + idfn),
        idf1: frac(2 * idtp, 2 * idtp + idfp + idfn),
    })
}
