//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use stereo_mot::{TrackRecord, TrackSet};

/// Small random scene: up to `max_ids` ground-truth objects over `frames`
/// frames, predictions with noise, misses, id swaps and false positives.
pub fn toy_scene(seed: u64, max_ids: u32, frames: u32) -> (TrackSet, TrackSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 2.5).unwrap();
    let n_gt = rng.random_range(1..=max_ids);
    let mut gt = Vec::new();
    let mut pred = Vec::new();
    let mut owner: Vec<u32> = (0..n_gt).map(|i| i + 1).collect();
    let starts: Vec<(f64, f64, f64, f64)> = (0..n_gt)
        .map(|_| {
            (
                rng.random_range(0.0..80.0),
                rng.random_range(0.0..80.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            )
        })
        .collect();
    let sizes: Vec<(f64, f64)> = (0..n_gt).map(|_| (rng.random_range(4.0..10.0), rng.random_range(3.0..8.0))).collect();
    for f in 1..=frames {
        let mut used = BTreeSet::new();
        for g in 0..n_gt as usize {
            // the first object is always visible in frame 1 so the scene is never empty
            if rng.random_bool(0.1) && (f, g) != (1, 0) {
                continue;
            }
            let (x, y, vx, vy) = starts[g];
            let (cx, cy) = (x + vx * f as f64, y + vy * f as f64);
            gt.push(TrackRecord::new(f, g as u32 + 1, cx, cy, sizes[g].0, sizes[g].1));
            if rng.random_bool(0.12) {
                owner[g] = rng.random_range(1..=max_ids);
            }
            if rng.random_bool(0.2) || !used.insert(owner[g]) {
                continue;
            }
            pred.push(TrackRecord::new(
                f,
                owner[g],
                cx + noise.sample(&mut rng),
                cy + noise.sample(&mut rng),
                sizes[g].0 * rng.random_range(0.8..1.2),
                sizes[g].1 * rng.random_range(0.8..1.2),
            ));
        }
        if rng.random_bool(0.25) {
            let id = rng.random_range(1..=max_ids);
            if used.insert(id) {
                pred.push(TrackRecord::new(f, id, rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), 5.0, 4.0));
            }
        }
    }
    (TrackSet::new(gt).unwrap(), TrackSet::new(pred).unwrap())
}

pub fn dist(a: &TrackRecord, b: &TrackRecord) -> f64 {
    (a.cx - b.cx).hypot(a.cy - b.cy)
}

pub fn avg_size(gt: &TrackSet) -> f64 {
    gt.records().iter().map(|r| r.x_off + r.y_off).sum::<f64>() / gt.len() as f64
}

fn frame_map(set: &TrackSet) -> BTreeMap<u32, Vec<TrackRecord>> {
    let mut m: BTreeMap<u32, Vec<TrackRecord>> = BTreeMap::new();
    for r in set.records() {
        m.entry(r.frame).or_default().push(*r);
    }
    m
}

/// Every partial matching between `n` rows and `m` columns using allowed
/// pairs; the best by (cardinality desc, cost asc) is returned as row->col.
pub fn best_matching(n: usize, m: usize, cost: &dyn Fn(usize, usize) -> Option<f64>) -> Vec<Option<usize>> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        r: usize,
        n: usize,
        m: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        card: usize,
        total: f64,
        best: &mut (usize, f64, Vec<Option<usize>>),
        cost: &dyn Fn(usize, usize) -> Option<f64>,
    ) {
        if r == n {
            if card > best.0 || (card == best.0 && total < best.1) {
                *best = (card, total, cur.clone());
            }
            return;
        }
        rec(r + 1, n, m, used, cur, card, total, best, cost);
        for c in 0..m {
            if used[c] {
                continue;
            }
            if let Some(x) = cost(r, c) {
                used[c] = true;
                cur[r] = Some(c);
                rec(r + 1, n, m, used, cur, card + 1, total + x, best, cost);
                cur[r] = None;
                used[c] = false;
            }
        }
    }
    let mut best = (0, f64::INFINITY, vec![None; n]);
    rec(0, n, m, &mut vec![false; m], &mut vec![None; n], 0, 0.0, &mut best, cost);
    best.2
}

/// Co-occurrence counts (pred, gt) within `radius`.
pub fn cooccurrence(gt: &TrackSet, pred: &TrackSet, radius: f64) -> BTreeMap<(u32, u32), usize> {
    let mut c = BTreeMap::new();
    for p in pred.records() {
        for g in gt.records().iter().filter(|g| g.frame == p.frame) {
            if dist(g, p) <= radius {
                *c.entry((p.id, g.id)).or_insert(0) += 1;
            }
        }
    }
    c
}

/// Exhaustive search over all one-to-one id assignments for the maximum
/// identity true-positive count.
pub fn brute_idtp(gt: &TrackSet, pred: &TrackSet, radius: f64) -> usize {
    let counts = cooccurrence(gt, pred, radius);
    let gids: Vec<u32> = gt.ids().into_iter().collect();
    let pids: Vec<u32> = pred.ids().into_iter().collect();
    fn rec(i: usize, pids: &[u32], gids: &[u32], used: &mut Vec<bool>, counts: &BTreeMap<(u32, u32), usize>) -> usize {
        if i == pids.len() {
            return 0;
        }
        let mut best = rec(i + 1, pids, gids, used, counts);
        for (j, g) in gids.iter().enumerate() {
            if !used[j] {
                used[j] = true;
                let v = counts.get(&(pids[i], *g)).copied().unwrap_or(0) + rec(i + 1, pids, gids, used, counts);
                used[j] = false;
                best = best.max(v);
            }
        }
        best
    }
    rec(0, &pids, &gids, &mut vec![false; gids.len()], &counts)
}

pub fn brute_idf1(gt: &TrackSet, pred: &TrackSet, radius: f64) -> f64 {
    let idtp = brute_idtp(gt, pred, radius);
    2.0 * idtp as f64 / (gt.len() + pred.len()) as f64
}

#[derive(Debug, PartialEq)]
pub struct Clear {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub idsw: usize,
    pub gt: usize,
}

/// CLEAR-style counting with exhaustive per-frame matching. `preferred`
/// maps gt id to its globally assigned pred id.
pub fn brute_clear(gt: &TrackSet, pred: &TrackSet, radius: f64, preferred: &BTreeMap<u32, u32>) -> Clear {
    let gf = frame_map(gt);
    let pf = frame_map(pred);
    let frames: BTreeSet<u32> = gf.keys().chain(pf.keys()).copied().collect();
    let mut last: BTreeMap<u32, u32> = BTreeMap::new();
    let mut out = Clear { tp: 0, fp: 0, fn_: 0, idsw: 0, gt: gt.len() };
    for f in frames {
        let gs = gf.get(&f).cloned().unwrap_or_default();
        let ps = pf.get(&f).cloned().unwrap_or_default();
        let mut pair: Vec<Option<usize>> = vec![None; gs.len()];
        let mut taken = vec![false; ps.len()];
        for (i, g) in gs.iter().enumerate() {
            let want = last.get(&g.id).or(preferred.get(&g.id));
            if let Some(w) = want {
                if let Some(j) = ps.iter().position(|p| p.id == *w) {
                    if !taken[j] && dist(g, &ps[j]) <= radius {
                        pair[i] = Some(j);
                        taken[j] = true;
                    }
                }
            }
        }
        let fg: Vec<usize> = (0..gs.len()).filter(|i| pair[*i].is_none()).collect();
        let fp: Vec<usize> = (0..ps.len()).filter(|j| !taken[*j]).collect();
        let m = best_matching(fg.len(), fp.len(), &|r, c| {
            let d = dist(&gs[fg[r]], &ps[fp[c]]);
            (d <= radius).then(|| d / radius)
        });
        for (r, c) in m.iter().enumerate() {
            if let Some(c) = c {
                pair[fg[r]] = Some(fp[*c]);
            }
        }
        let mut tp = 0;
        for (i, p) in pair.iter().enumerate() {
            if let Some(j) = p {
                tp += 1;
                if let Some(prev) = last.insert(gs[i].id, ps[*j].id) {
                    if prev != ps[*j].id {
                        out.idsw += 1;
                    }
                }
            }
        }
        out.tp += tp;
        out.fp += ps.len() - tp;
        out.fn_ += gs.len() - tp;
    }
    out
}

pub fn brute_mota(c: &Clear) -> f64 {
    1.0 - (c.fn_ + c.fp + c.idsw) as f64 / c.gt as f64
}

#[derive(Debug, PartialEq)]
pub struct Hota {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub la: f64,
}

/// HOTA components by direct evaluation, with exhaustive per-frame matching
/// at every threshold.
pub fn brute_hota(gt: &TrackSet, pred: &TrackSet, radius: f64, alphas: &[f64]) -> Hota {
    let gf = frame_map(gt);
    let pf = frame_map(pred);
    let frames: BTreeSet<u32> = gf.keys().chain(pf.keys()).copied().collect();
    let count_id = |set: &TrackSet, id: u32| set.records().iter().filter(|r| r.id == id).count();
    let sim = |g: &TrackRecord, p: &TrackRecord| 1.0 - dist(g, p).min(radius) / radius;
    let (mut prod, mut da_sum, mut aa_sum_all, mut la_sum_all) = (1.0, 0.0, 0.0, 0.0);
    for &alpha in alphas {
        let mut tps: Vec<(u32, u32, f64)> = Vec::new();
        for f in &frames {
            let gs = gf.get(f).cloned().unwrap_or_default();
            let ps = pf.get(f).cloned().unwrap_or_default();
            let m = best_matching(gs.len(), ps.len(), &|r, c| {
                let s = sim(&gs[r], &ps[c]);
                (s >= alpha).then_some(1.0 - s)
            });
            for (r, c) in m.iter().enumerate() {
                if let Some(c) = c {
                    tps.push((gs[r].id, ps[*c].id, sim(&gs[r], &ps[*c])));
                }
            }
        }
        let tp = tps.len();
        let fn_ = gt.len() - tp;
        let fp = pred.len() - tp;
        let (da, aa, la) = if tp == 0 {
            (0.0, 0.0, 0.0)
        } else {
            let mut aa = 0.0;
            let mut la = 0.0;
            for (g, p, s) in &tps {
                let tpa = tps.iter().filter(|(g2, p2, _)| g2 == g && p2 == p).count();
                let fna = count_id(gt, *g) - tpa;
                let fpa = count_id(pred, *p) - tpa;
                aa += tpa as f64 / (tpa + fna + fpa) as f64;
                la += s;
            }
            (tp as f64 / (tp + fn_ + fp) as f64, aa / tp as f64, la / tp as f64)
        };
        prod *= da * aa * la;
        da_sum += da;
        aa_sum_all += aa;
        la_sum_all += la;
    }
    let k = alphas.len() as f64;
    Hota {
        hota: prod.powf(1.0 / (3.0 * k)),
        deta: da_sum / k,
        assa: aa_sum_all / k,
        la: la_sum_all / k,
    }
}
