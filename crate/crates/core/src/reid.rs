//! Post-track re-identification.
//!
//! Trackers often hand a fish a fresh id after losing it for a few frames.
//! [`reid_pass`] relabels such "new" tracks back to the "old" track they
//! continue, [`prune_short`] drops short-lived false positives and
//! [`compact_ids`] renumbers the survivors. [`reidentify`] runs all three.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mot_io::{TrackRecord, TrackSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReidConfig {
    /// Frames around the old track's last frame searched for a new track.
    /// The window is symmetric: `(end - window, end + window]`.
    pub window: u32,
    /// Maximum pixel distance between the old track's last center and the
    /// new track's first center.
    pub radius: f64,
    /// Maximum number of co-existing frames.
    pub overlap_limit: u32,
    /// Tracks with fewer distinct frames are pruned.
    pub min_track_len: u32,
    /// First id after compaction.
    pub id_base: u32,
}

impl Default for ReidConfig {
    fn default() -> Self {
        Self {
            window: 100,
            radius: 50.0,
            overlap_limit: 10,
            min_track_len: 30,
            id_base: 0,
        }
    }
}

impl ReidConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.overlap_limit == 0 || self.min_track_len == 0 {
            return Err(Error::Config("re-id window, overlap limit and minimum length must be positive".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config("re-id radius must be positive".into()));
        }
        if self.overlap_limit >= self.window {
            return Err(Error::Config("re-id overlap limit must be smaller than the window".into()));
        }
        Ok(())
    }
}

/// One applied merge: `new_id`'s records now carry `old_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub old_id: u32,
    pub new_id: u32,
    /// First frame of the new track.
    pub merge_frame: u32,
    /// Pixel distance between the two track ends.
    pub distance: f64,
    /// Records of the new track dropped because the old track already
    /// occupied those frames.
    pub dropped_overlap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReidReport {
    pub merges: Vec<Merge>,
    pub pruned_ids: Vec<u32>,
    /// Surviving pre-compaction id -> compacted id.
    pub id_remap: BTreeMap<u32, u32>,
    pub ids_before: usize,
    pub ids_after: usize,
}

/// Ids not present in every frame of the video.
pub fn find_candidates(tracks: &TrackSet) -> BTreeSet<u32> {
    let full = tracks.frame_count() as usize;
    tracks
        .by_id()
        .into_iter()
        .filter(|(_, recs)| recs.len() != full)
        .map(|(id, _)| id)
        .collect()
}

/// Euclidean pixel distance.
pub fn proximity_distance(a: Point2<f64>, b: Point2<f64>) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

struct Span<'a> {
    id: u32,
    records: &'a [TrackRecord],
}

impl Span<'_> {
    fn first(&self) -> &TrackRecord {
        &self.records[0]
    }
    fn last(&self) -> &TrackRecord {
        &self.records[self.records.len() - 1]
    }
}

// Frames shared by two frame-sorted record lists.
fn shared_frames(a: &[TrackRecord], b: &[TrackRecord]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].frame.cmp(&b[j].frame) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i].frame);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

struct Candidate {
    new_id: u32,
    start: u32,
    distance: f64,
    overlap: Vec<u32>,
}

fn best_successor(old: &Span, others: &[Span], cfg: &ReidConfig) -> Option<Candidate> {
    let end = old.last().frame as i64;
    let tail_start = old.records.len().saturating_sub(cfg.overlap_limit as usize);
    let tail = &old.records[tail_start..];
    let mut best: Option<Candidate> = None;
    for new in others {
        if new.id == old.id {
            continue;
        }
        let start = new.first().frame as i64;
        let in_window = start > end - cfg.window as i64 && start <= end + cfg.window as i64;
        if !in_window
            || start < end - cfg.overlap_limit as i64
            || start <= old.first().frame as i64
            || new.last().frame as i64 <= end
        {
            continue;
        }
        let distance = proximity_distance(old.last().center(), new.first().center());
        if distance > cfg.radius {
            continue;
        }
        let overlap = shared_frames(old.records, new.records);
        if overlap.len() > cfg.overlap_limit as usize {
            continue;
        }
        if overlap.iter().any(|f| !tail.iter().any(|r| r.frame == *f)) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => (distance, start, new.id) < (b.distance, b.start as i64, b.new_id),
        };
        if better {
            best = Some(Candidate {
                new_id: new.id,
                start: start as u32,
                distance,
                overlap,
            });
        }
    }
    best
}

/// Relabels "new" tracks that continue a vanished "old" track, repeating
/// until no further merge applies.
///
/// Old tracks are visited by `(last frame, id)`. Among qualifying new tracks
/// the closest wins, then the earliest start, then the smallest id. The old
/// id survives. Where both tracks occupy a frame (allowed only in the old
/// track's final `overlap_limit` frames) the old record is kept.
pub fn reid_pass(tracks: &TrackSet, cfg: &ReidConfig) -> Result<(TrackSet, Vec<Merge>)> {
    cfg.validate()?;
    let mut current = tracks.clone();
    let mut merges = Vec::new();
    loop {
        let candidates = find_candidates(&current);
        let grouped = current.by_id();
        let spans: Vec<Span> = grouped
            .iter()
            .filter(|(id, _)| candidates.contains(id))
            .map(|(id, recs)| Span { id: *id, records: recs })
            .collect();
        let mut order: Vec<&Span> = spans.iter().collect();
        order.sort_by_key(|s| (s.last().frame, s.id));

        let found = order
            .iter()
            .find_map(|old| best_successor(old, &spans, cfg).map(|c| (old.id, c)));
        let Some((old_id, cand)) = found else {
            break;
        };
        let overlap: BTreeSet<u32> = cand.overlap.iter().copied().collect();
        let records: Vec<TrackRecord> = current
            .records()
            .iter()
            .filter(|r| !(r.id == cand.new_id && overlap.contains(&r.frame)))
            .map(|r| {
                let mut r = *r;
                if r.id == cand.new_id {
                    r.id = old_id;
                }
                r
            })
            .collect();
        current = current.replace_records(records)?;
        log::debug!(
            "re-id: {} <- {} at frame {} ({:.1} px)",
            old_id,
            cand.new_id,
            cand.start,
            cand.distance
        );
        merges.push(Merge {
            old_id,
            new_id: cand.new_id,
            merge_frame: cand.start,
            distance: cand.distance,
            dropped_overlap: overlap.len(),
        });
    }
    Ok((current, merges))
}

/// Removes ids observed in fewer than `min_track_len` distinct frames.
pub fn prune_short(tracks: &TrackSet, cfg: &ReidConfig) -> Result<(TrackSet, Vec<u32>)> {
    let short: BTreeSet<u32> = tracks
        .by_id()
        .into_iter()
        .filter(|(_, recs)| recs.len() < cfg.min_track_len as usize)
        .map(|(id, _)| id)
        .collect();
    let kept = tracks
        .records()
        .iter()
        .filter(|r| !short.contains(&r.id))
        .copied()
        .collect();
    Ok((tracks.replace_records(kept)?, short.into_iter().collect()))
}

/// Renumbers ids to `base, base+1, ...` in order of first appearance
/// (ties by original id).
pub fn compact_ids(tracks: &TrackSet, base: u32) -> Result<(TrackSet, BTreeMap<u32, u32>)> {
    let mut firsts: Vec<(u32, u32)> = tracks
        .by_id()
        .into_iter()
        .map(|(id, recs)| (recs[0].frame, id))
        .collect();
    firsts.sort_unstable();
    let remap: BTreeMap<u32, u32> = firsts
        .into_iter()
        .enumerate()
        .map(|(i, (_, id))| (id, base + i as u32))
        .collect();
    let records = tracks
        .records()
        .iter()
        .map(|r| TrackRecord { id: remap[&r.id], ..*r })
        .collect();
    Ok((tracks.replace_records(records)?, remap))
}

/// Full re-identification: merge to fixpoint, prune, compact.
pub fn reidentify(tracks: &TrackSet, cfg: &ReidConfig) -> Result<(TrackSet, ReidReport)> {
    let ids_before = tracks.ids().len();
    let (merged, merges) = reid_pass(tracks, cfg)?;
    let (pruned, pruned_ids) = prune_short(&merged, cfg)?;
    let (compacted, id_remap) = compact_ids(&pruned, cfg.id_base)?;
    let ids_after = compacted.ids().len();
    Ok((
        compacted,
        ReidReport {
            merges,
            pruned_ids,
            id_remap,
            ids_before,
            ids_after,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn track(id: u32, frames: std::ops::RangeInclusive<u32>, start: (f64, f64), step: (f64, f64)) -> Vec<TrackRecord> {
        let f0 = *frames.start();
        frames
            .map(|f| {
                let k = (f - f0) as f64;
                TrackRecord::new(f, id, start.0 + k * step.0, start.1 + k * step.1, 10.0, 5.0)
            })
            .collect()
    }

    fn set(parts: Vec<Vec<TrackRecord>>, frames: u32) -> TrackSet {
        TrackSet::new(parts.concat()).unwrap().with_frame_count(frames).unwrap()
    }

    #[test]
    fn full_span_is_not_a_candidate() {
        let ts = set(vec![track(1, 1..=260, (0.0, 0.0), (1.0, 0.0)), track(2, 1..=100, (500.0, 0.0), (0.0, 0.0))], 260);
        assert_eq!(find_candidates(&ts), BTreeSet::from([2]));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(proximity_distance(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0)), 5.0);
        assert_eq!(proximity_distance(Point2::new(7.5, -2.0), Point2::new(7.5, -2.0)), 0.0);
    }

    #[test]
    fn canonical_gap_bridge() {
        // A ends at frame 120 at (500, 500); B starts at 130 at (510, 505).
        let a = track(4, 21..=120, (401.0, 500.0), (1.0, 0.0));
        assert_eq!(a.last().unwrap().center(), Point2::new(500.0, 500.0));
        let b = track(9, 130..=200, (510.0, 505.0), (0.5, 0.0));
        let ts = set(vec![a, b], 260);
        let (out, merges) = reid_pass(&ts, &ReidConfig::default()).unwrap();
        assert_eq!(merges.len(), 1);
        assert_eq!((merges[0].old_id, merges[0].new_id, merges[0].merge_frame), (4, 9, 130));
        assert_eq!(out.ids(), BTreeSet::from([4]));
        assert_eq!(out.len(), ts.len());
    }

    #[test]
    fn radius_exclusion() {
        let a = track(4, 21..=120, (401.0, 500.0), (1.0, 0.0));
        let b = track(9, 130..=200, (700.0, 500.0), (0.0, 0.0));
        let (_, merges) = reid_pass(&set(vec![a, b], 260), &ReidConfig::default()).unwrap();
        assert!(merges.is_empty());
    }

    #[test]
    fn window_exclusion() {
        let a = track(4, 1..=100, (0.0, 0.0), (0.0, 0.0));
        let b = track(9, 201..=260, (1.0, 0.0), (0.0, 0.0));
        let (_, merges) = reid_pass(&set(vec![a.clone(), b], 260), &ReidConfig::default()).unwrap();
        assert!(merges.is_empty());
        let b = track(9, 200..=260, (1.0, 0.0), (0.0, 0.0));
        let (_, merges) = reid_pass(&set(vec![a, b], 260), &ReidConfig::default()).unwrap();
        assert_eq!(merges.len(), 1);
    }

    #[test]
    fn overlap_of_ten_frames_allowed_eleven_not() {
        let a = track(1, 1..=100, (0.0, 0.0), (0.0, 0.0));
        let b10 = track(2, 91..=200, (5.0, 0.0), (0.0, 0.0));
        let (out, merges) = reid_pass(&set(vec![a.clone(), b10], 260), &ReidConfig::default()).unwrap();
        assert_eq!(merges.len(), 1);
        assert_eq!(merges[0].dropped_overlap, 10);
        // old records kept in the overlap
        assert_eq!(out.get(95, 1).unwrap().cx, 0.0);
        assert_eq!(out.len(), 200);

        let b11 = track(2, 90..=200, (5.0, 0.0), (0.0, 0.0));
        let (_, merges) = reid_pass(&set(vec![a, b11], 260), &ReidConfig::default()).unwrap();
        assert!(merges.is_empty());
    }

    #[test]
    fn overlap_must_sit_in_old_tail() {
        // Old track has a hole, so its last 10 observed frames start at 81.
        let mut a = track(1, 1..=80, (0.0, 0.0), (0.0, 0.0));
        a.extend(track(1, 91..=100, (0.0, 0.0), (0.0, 0.0)));
        // New track overlaps old only at frames 91..=100, inside the tail.
        let b = track(2, 90..=200, (3.0, 0.0), (0.0, 0.0));
        let (_, merges) = reid_pass(&set(vec![a, b], 260), &ReidConfig::default()).unwrap();
        assert_eq!(merges.len(), 1);
    }

    #[test]
    fn tie_break_prefers_closest_then_earliest_then_smallest_id() {
        let a = track(1, 1..=100, (100.0, 100.0), (0.0, 0.0));
        let near = track(7, 120..=200, (110.0, 100.0), (0.0, 0.0));
        let far = track(3, 105..=200, (130.0, 100.0), (0.0, 0.0));
        let (_, merges) = reid_pass(&set(vec![a.clone(), near, far], 260), &ReidConfig::default()).unwrap();
        assert_eq!(merges[0].new_id, 7);

        let late = track(3, 120..=200, (110.0, 100.0), (0.0, 0.0));
        let early = track(8, 110..=200, (90.0, 100.0), (0.0, 0.0));
        let (_, merges) = reid_pass(&set(vec![a.clone(), late, early], 260), &ReidConfig::default()).unwrap();
        assert_eq!(merges[0].new_id, 8);

        let x = track(8, 110..=200, (90.0, 100.0), (0.0, 0.0));
        let y = track(5, 110..=200, (110.0, 100.0), (0.0, 0.0));
        let (_, merges) = reid_pass(&set(vec![a, x, y], 260), &ReidConfig::default()).unwrap();
        assert_eq!(merges[0].new_id, 5);
    }

    #[test]
    fn chains_merge_to_fixpoint() {
        let parts = vec![
            track(1, 1..=60, (0.0, 0.0), (0.5, 0.0)),
            track(5, 70..=140, (35.0, 0.0), (0.5, 0.0)),
            track(9, 150..=260, (75.0, 0.0), (0.5, 0.0)),
        ];
        let ts = set(parts, 260);
        let (out, merges) = reid_pass(&ts, &ReidConfig::default()).unwrap();
        assert_eq!(merges.len(), 2);
        assert_eq!(out.ids(), BTreeSet::from([1]));
        let (again, more) = reid_pass(&out, &ReidConfig::default()).unwrap();
        assert!(more.is_empty());
        assert_eq!(again, out);
    }

    #[test]
    fn prune_boundary() {
        let ts = set(vec![track(1, 1..=29, (0.0, 0.0), (0.0, 0.0)), track(2, 1..=30, (90.0, 0.0), (0.0, 0.0))], 260);
        let (out, pruned) = prune_short(&ts, &ReidConfig::default()).unwrap();
        assert_eq!(pruned, vec![1]);
        assert_eq!(out.ids(), BTreeSet::from([2]));
    }

    #[test]
    fn compaction_follows_first_appearance() {
        let ts = set(
            vec![
                track(204, 5..=9, (0.0, 0.0), (0.0, 0.0)),
                track(3, 1..=9, (50.0, 0.0), (0.0, 0.0)),
                track(17, 2..=9, (90.0, 0.0), (0.0, 0.0)),
            ],
            10,
        );
        let (out, remap) = compact_ids(&ts, 0).unwrap();
        assert_eq!(remap, BTreeMap::from([(3, 0), (17, 1), (204, 2)]));
        assert_eq!(out.ids(), BTreeSet::from([0, 1, 2]));
        let (same, identity) = compact_ids(&out, 0).unwrap();
        assert_eq!(same, out);
        assert!(identity.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn report_counts_balance() {
        let parts = vec![
            track(1, 1..=60, (0.0, 0.0), (0.5, 0.0)),
            track(5, 70..=260, (35.0, 0.0), (0.5, 0.0)),
            track(8, 100..=110, (900.0, 400.0), (0.0, 0.0)),
            track(2, 1..=260, (500.0, 500.0), (0.0, 0.0)),
        ];
        let (out, report) = reidentify(&set(parts, 260), &ReidConfig::default()).unwrap();
        assert_eq!(report.ids_before, 4);
        assert_eq!(report.ids_after, report.ids_before - report.merges.len() - report.pruned_ids.len());
        assert_eq!(report.ids_after, 2);
        assert_eq!(out.ids(), BTreeSet::from([0, 1]));
    }

    #[test]
    fn config_validation() {
        let bad = ReidConfig { overlap_limit: 100, ..ReidConfig::default() };
        assert!(bad.validate().is_err());
        let bad = ReidConfig { radius: 0.0, ..ReidConfig::default() };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn distance_matches_recomputation(ax in -1e4f64..1e4, ay in -1e4f64..1e4, bx in -1e4f64..1e4, by in -1e4f64..1e4) {
            let d = proximity_distance(Point2::new(ax, ay), Point2::new(bx, by));
            prop_assert!((d - (bx - ax).hypot(by - ay)).abs() <= 1e-9 * (1.0 + d));
            prop_assert_eq!(d, proximity_distance(Point2::new(bx, by), Point2::new(ax, ay)));
        }

        #[test]
        fn pass_only_changes_ids(specs in proptest::collection::vec((1u32..200, 5u32..80, 0.0f64..300.0, 0.0f64..300.0), 1..8)) {
            let parts: Vec<Vec<TrackRecord>> = specs
                .iter()
                .enumerate()
                .map(|(i, (s, len, x, y))| track(i as u32, *s..=(*s + *len).min(260), (*x, *y), (0.3, 0.1)))
                .collect();
            let ts = set(parts, 260);
            let (out, merges) = reid_pass(&ts, &ReidConfig::default()).unwrap();
            prop_assert!(out.ids().len() <= ts.ids().len());
            prop_assert_eq!(ts.ids().len() - out.ids().len(), merges.len());
            let dropped: usize = merges.iter().map(|m| m.dropped_overlap).sum();
            prop_assert_eq!(out.len() + dropped, ts.len());
            for r in out.records() {
                let originals: Vec<_> = ts.records().iter().filter(|o| o.frame == r.frame && o.cx == r.cx && o.cy == r.cy).collect();
                prop_assert!(!originals.is_empty());
            }
            let (again, more) = reid_pass(&out, &ReidConfig::default()).unwrap();
            prop_assert!(more.is_empty());
            prop_assert_eq!(again, out);
        }
    }
}
