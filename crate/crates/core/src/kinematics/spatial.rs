use serde::{Deserialize, Serialize};

use super::Trajectories;

/// 2D histogram over two coordinate axes; `counts[row][col]` with rows
/// along the second axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub counts: Vec<Vec<u64>>,
}

impl DensityGrid {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

fn edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
}

fn bin_of(edges: &[f64], v: f64) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
}

/// Histogram of positions projected on `axes` (0 = x, 1 = y, 2 = z) over the
/// data's bounding box. Values on the upper edge land in the last bin.
pub fn density_map(traj: &Trajectories, bins: (usize, usize), axes: (usize, usize)) -> Option<DensityGrid> {
    let pts: Vec<(f64, f64)> = traj.0.values().flatten().map(|(_, p)| (p[axes.0], p[axes.1])).collect();
    if pts.is_empty() || bins.0 == 0 || bins.1 == 0 {
        return None;
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        pts.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (x0, x1) = fold(|p| p.0);
    let (y0, y1) = fold(|p| p.1);
    let x_edges = edges(x0, x1, bins.0);
    let y_edges = edges(y0, y1, bins.1);
    let mut counts = vec![vec![0u64; bins.0]; bins.1];
    for (x, y) in pts {
        counts[bin_of(&y_edges, y)][bin_of(&x_edges, x)] += 1;
    }
    Some(DensityGrid { x_edges, y_edges, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialSummary {
    pub id: u32,
    pub count: usize,
    pub centroid: [f64; 3],
    pub min: [f64; 3],
    pub max: [f64; 3],
}

pub fn spatial_distribution(traj: &Trajectories) -> Vec<SpatialSummary> {
    traj.0
        .iter()
        .filter(|(_, pts)| !pts.is_empty())
        .map(|(id, pts)| {
            let n = pts.len() as f64;
            let mut s = SpatialSummary {
                id: *id,
                count: pts.len(),
                centroid: [0.0; 3],
                min: [f64::INFINITY; 3],
                max: [f64::NEG_INFINITY; 3],
            };
            for (_, p) in pts {
                for k in 0..3 {
                    s.centroid[k] += p[k] / n;
                    s.min[k] = s.min[k].min(p[k]);
                    s.max[k] = s.max[k].max(p[k]);
                }
            }
            s
        })
        .collect()
}

/// Visible-id count for every frame from the first to the last observed
/// one, plus a trailing moving average over `window` frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalPattern {
    pub frames: Vec<u32>,
    pub counts: Vec<usize>,
    pub moving_average: Vec<f64>,
    pub window: usize,
}

pub fn temporal_pattern(traj: &Trajectories, window: usize) -> TemporalPattern {
    let window = window.max(1);
    let frames_seen = traj.0.values().flatten().map(|(f, _)| *f);
    let (lo, hi) = frames_seen.fold((u32::MAX, 0), |(lo, hi), f| (lo.min(f), hi.max(f)));
    if lo > hi {
        return TemporalPattern { frames: vec![], counts: vec![], moving_average: vec![], window };
    }
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for (f, _) in traj.0.values().flatten() {
        counts[(f - lo) as usize] += 1;
    }
    let mut moving_average = Vec::with_capacity(counts.len());
    let mut sum = 0usize;
    for i in 0..counts.len() {
        sum += counts[i];
        if i >= window {
            sum -= counts[i - window];
        }
        moving_average.push(sum as f64 / (i + 1).min(window) as f64);
    }
    TemporalPattern { frames: (lo..=hi).collect(), counts, moving_average, window }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn one_id(points: Vec<(u32, Vector3<f64>)>) -> Trajectories {
        Trajectories(BTreeMap::from([(1, points)]))
    }

    #[test]
    fn single_record() {
        let g = density_map(&one_id(vec![(1, Vector3::new(3.0, 4.0, 0.0))]), (4, 4), (0, 1)).unwrap();
        assert_eq!(g.total(), 1);
        assert_eq!(g.counts.iter().flatten().filter(|c| **c == 1).count(), 1);
    }

    #[test]
    fn uniform_scatter_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pts = (0..10_000)
            .map(|i| (i + 1, Vector3::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), 0.0)))
            .collect();
        let g = density_map(&one_id(pts), (5, 5), (0, 1)).unwrap();
        assert_eq!(g.total(), 10_000);
        let flat: Vec<u64> = g.counts.iter().flatten().copied().collect();
        let (lo, hi) = (*flat.iter().min().unwrap(), *flat.iter().max().unwrap());
        assert!((hi as f64) / (lo as f64) < 2.0);
    }

    #[test]
    fn temporal_counts_sum_to_records() {
        let mut m = BTreeMap::new();
        m.insert(1, (1..=10).map(|f| (f, Vector3::zeros())).collect::<Vec<_>>());
        m.insert(2, (5..=20).step_by(3).map(|f| (f, Vector3::zeros())).collect::<Vec<_>>());
        let t = Trajectories(m);
        let p = temporal_pattern(&t, 4);
        assert_eq!(p.frames.first(), Some(&1));
        assert_eq!(p.frames.last(), Some(&20));
        assert_eq!(p.counts.iter().sum::<usize>(), t.record_count());
        assert_eq!(p.moving_average[0], 1.0);
        assert_eq!(p.moving_average[5], (1 + 1 + 2 + 1) as f64 / 4.0);
    }

    #[test]
    fn spatial_extent() {
        let s = spatial_distribution(&one_id(vec![(1, Vector3::new(0.0, 0.0, 0.0)), (2, Vector3::new(2.0, 4.0, 6.0))]));
        assert_eq!(s[0].centroid, [1.0, 2.0, 3.0]);
        assert_eq!(s[0].max, [2.0, 4.0, 6.0]);
    }
}
