use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SceneTruth;
use crate::error::{Error, Result};
use crate::mot_io::{TrackRecord, TrackSet, View};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentLog {
    pub fish: usize,
    pub view: View,
    pub old_id: u32,
    pub new_id: u32,
    pub split_frame: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropoutLog {
    pub fish: usize,
    pub view: View,
    /// Frames that were present and are now removed.
    pub removed: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlipLog {
    pub view: View,
    pub id: u32,
    pub start: u32,
    pub end: u32,
    pub center: (f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DegradeLog {
    pub fragments: Vec<FragmentLog>,
    pub dropouts: Vec<DropoutLog>,
    pub blips: Vec<BlipLog>,
    pub noise_px: f64,
    /// Every degraded id -> fish index; blips are absent.
    pub id_owner_left: BTreeMap<u32, usize>,
    pub id_owner_right: BTreeMap<u32, usize>,
}

impl DegradeLog {
    pub fn owners(&self, view: View) -> &BTreeMap<u32, usize> {
        if view == View::Right {
            &self.id_owner_right
        } else {
            &self.id_owner_left
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degraded {
    #[serde(skip)]
    pub left: TrackSet,
    #[serde(skip)]
    pub right: TrackSet,
    pub log: DegradeLog,
}

/// Applies the configured corruptions to the noise-free projections.
///
/// Order per view: dropouts, fragmentation, blips, then noise on every
/// remaining record. Uses its own generator seeded from the scene seed, so
/// the same truth always degrades the same way.
pub fn degrade(truth: &SceneTruth) -> Result<Degraded> {
    let cfg = &truth.config;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let noise = Normal::new(0.0, cfg.noise_px).map_err(|e| Error::Config(e.to_string()))?;
    let mut log = DegradeLog { noise_px: cfg.noise_px, ..Default::default() };
    let mut out = Vec::with_capacity(2);

    for (left, base) in [(true, &truth.left), (false, &truth.right)] {
        let view = if left { View::Left } else { View::Right };
        let id_of = |f: usize| if left { truth.fish[f].left_id } else { truth.fish[f].right_id };
        let mut next_id = base.ids().last().copied().unwrap_or(0).max(truth.fish.len() as u32) + 1;
        let mut owners: BTreeMap<u32, usize> = (0..truth.fish.len()).map(|f| (id_of(f), f)).collect();

        let mut removed: BTreeSet<(u32, u32)> = BTreeSet::new();
        for d in cfg.dropouts.iter().filter(|d| d.side.covers(left)) {
            let id = id_of(d.fish);
            let frames: Vec<u32> = (d.start..=d.end)
                .filter(|f| base.get(*f, id).is_some() && removed.insert((*f, id)))
                .collect();
            log.dropouts.push(DropoutLog { fish: d.fish, view, removed: frames });
        }

        // fish -> sorted (split frame, id from then on)
        let mut splits: BTreeMap<usize, Vec<(u32, u32)>> = BTreeMap::new();
        let mut frags: Vec<_> = cfg.fragmentation.iter().filter(|f| f.side.covers(left)).collect();
        frags.sort_by_key(|f| (f.fish, f.split_frame));
        for f in frags {
            let entry = splits.entry(f.fish).or_default();
            let old_id = entry.last().map_or(id_of(f.fish), |s| s.1);
            entry.push((f.split_frame, next_id));
            owners.insert(next_id, f.fish);
            log.fragments.push(FragmentLog { fish: f.fish, view, old_id, new_id: next_id, split_frame: f.split_frame });
            next_id += 1;
        }
        let owner_of_base: BTreeMap<u32, usize> = (0..truth.fish.len()).map(|f| (id_of(f), f)).collect();

        let mut records: Vec<TrackRecord> = Vec::with_capacity(base.len());
        for r in base.records() {
            if removed.contains(&(r.frame, r.id)) {
                continue;
            }
            let mut rec = *r;
            if let Some(list) = owner_of_base.get(&r.id).and_then(|f| splits.get(f)) {
                if let Some((_, id)) = list.iter().rev().find(|(s, _)| *s <= r.frame) {
                    rec.id = *id;
                }
            }
            records.push(rec);
        }

        let by_frame = base.by_frame();
        let b = &cfg.blips;
        for _ in 0..b.count {
            let len = rng.random_range(b.min_len..=b.max_len);
            let start = rng.random_range(1..=cfg.n_frames - len + 1);
            let end = start + len - 1;
            let (w, h) = (cfg.image_size.width as f64, cfg.image_size.height as f64);
            let lo = start.saturating_sub(b.window).max(1);
            let hi = (end + b.window).min(cfg.n_frames);
            let mut placed = None;
            for _ in 0..1000 {
                let c = Point2::new(rng.random_range(0.05 * w..0.95 * w), rng.random_range(0.05 * h..0.95 * h));
                let clear = (lo..=hi).all(|f| {
                    by_frame.get(&f).is_none_or(|recs| {
                        recs.iter().all(|r| (r.center() - c).norm() >= b.clearance_px)
                    }) && log.blips.iter().filter(|bl| bl.view == view && bl.start <= hi && bl.end >= lo).all(|bl| {
                        (Point2::new(bl.center.0, bl.center.1) - c).norm() >= b.clearance_px
                    })
                });
                if clear {
                    placed = Some(c);
                    break;
                }
            }
            let c = placed.ok_or_else(|| {
                Error::Config(format!("no room for a blip with {} px clearance", b.clearance_px))
            })?;
            let (x_off, y_off) = (rng.random_range(15.0..40.0), rng.random_range(8.0..20.0));
            for f in start..=end {
                records.push(TrackRecord::new(f, next_id, c.x, c.y, x_off, y_off));
            }
            log.blips.push(BlipLog { view, id: next_id, start, end, center: (c.x, c.y) });
            next_id += 1;
        }

        if cfg.noise_px > 0.0 {
            for r in &mut records {
                r.cx += noise.sample(&mut rng);
                r.cy += noise.sample(&mut rng);
            }
        }
        if left {
            log.id_owner_left = owners;
        } else {
            log.id_owner_right = owners;
        }
        out.push(base.replace_records(records)?);
    }
    let right = out.pop().unwrap();
    let left = out.pop().unwrap();
    Ok(Degraded { left, right, log })
}
