//! Motion analytics over 2D or 3D tracks.
//!
//! Series are computed between consecutive observed frames using the true
//! frame delta; gaps are never interpolated.

mod output;
mod plot;
mod spatial;

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::mot_io::TrackSet;
use crate::triangulate::Track3DSet;

pub use output::{analyze, overlay_json, series_csv, AnalysisConfig, AnalysisSummary};
pub use plot::{heatmap_svg, line_plot_svg};
pub use spatial::{density_map, spatial_distribution, temporal_pattern, DensityGrid, SpatialSummary, TemporalPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Speed,
    Acceleration,
    Depth,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Speed => "speed",
            Quantity::Acceleration => "acceleration",
            Quantity::Depth => "depth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicSeries {
    pub id: u32,
    pub quantity: Quantity,
    /// `(frame, value)` with strictly increasing frames.
    pub samples: Vec<(u32, f64)>,
}

/// Per-id positions ordered by frame. 2D tracks use `z = 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectories(pub BTreeMap<u32, Vec<(u32, Vector3<f64>)>>);

impl From<&Track3DSet> for Trajectories {
    fn from(set: &Track3DSet) -> Self {
        let mut map: BTreeMap<u32, Vec<(u32, Vector3<f64>)>> = BTreeMap::new();
        for r in &set.records {
            map.entry(r.left_id).or_default().push((r.frame, Vector3::new(r.x, r.y, r.z)));
        }
        for v in map.values_mut() {
            v.sort_by_key(|s| s.0);
        }
        Trajectories(map)
    }
}

impl From<&TrackSet> for Trajectories {
    fn from(set: &TrackSet) -> Self {
        Trajectories(
            set.by_id()
                .into_iter()
                .map(|(id, recs)| (id, recs.iter().map(|r| (r.frame, Vector3::new(r.cx, r.cy, 0.0))).collect()))
                .collect(),
        )
    }
}

impl Trajectories {
    pub fn record_count(&self) -> usize {
        self.0.values().map(Vec::len).sum()
    }
}

/// Speed at each observed frame after the first, from the step to the
/// previous observation. Ids with fewer than two samples get an empty series.
pub fn speed_series(traj: &Trajectories, fps: f64) -> Vec<KinematicSeries> {
    traj.0
        .iter()
        .map(|(id, pts)| KinematicSeries {
            id: *id,
            quantity: Quantity::Speed,
            samples: pts
                .windows(2)
                .map(|w| {
                    let dt = (w[1].0 - w[0].0) as f64 / fps;
                    (w[1].0, (w[1].1 - w[0].1).norm() / dt)
                })
                .collect(),
        })
        .collect()
}

/// Finite difference of a speed series over the true frame delta.
pub fn acceleration_series(speed: &KinematicSeries, fps: f64) -> KinematicSeries {
    KinematicSeries {
        id: speed.id,
        quantity: Quantity::Acceleration,
        samples: speed
            .samples
            .windows(2)
            .map(|w| (w[1].0, (w[1].1 - w[0].1) / ((w[1].0 - w[0].0) as f64 / fps)))
            .collect(),
    }
}

pub fn path_length(traj: &Trajectories, id: u32) -> Option<f64> {
    let pts = traj.0.get(&id)?;
    Some(pts.windows(2).map(|w| (w[1].1 - w[0].1).norm()).sum())
}

pub fn path_lengths(traj: &Trajectories) -> BTreeMap<u32, f64> {
    traj.0.keys().map(|id| (*id, path_length(traj, *id).unwrap_or(0.0))).collect()
}

pub fn depth_series(set: &Track3DSet) -> Vec<KinematicSeries> {
    Trajectories::from(set)
        .0
        .into_iter()
        .map(|(id, pts)| KinematicSeries {
            id,
            quantity: Quantity::Depth,
            samples: pts.into_iter().map(|(f, p)| (f, p.z)).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulate::Track3DRecord;
    use nalgebra::Rotation3;
    use proptest::prelude::*;

    fn traj(points: &[(u32, [f64; 3])]) -> Trajectories {
        Trajectories(BTreeMap::from([(0, points.iter().map(|(f, p)| (*f, Vector3::from(*p))).collect())]))
    }

    #[test]
    fn stationary_fish() {
        let t = traj(&[(1, [1.0, 2.0, 3.0]), (2, [1.0, 2.0, 3.0]), (5, [1.0, 2.0, 3.0])]);
        let s = &speed_series(&t, 240.0)[0];
        assert_eq!(s.samples, vec![(2, 0.0), (5, 0.0)]);
        assert_eq!(path_length(&t, 0), Some(0.0));
    }

    #[test]
    fn unit_steps() {
        let pts: Vec<(u32, [f64; 3])> = (1..=101).map(|f| (f, [f as f64, 0.0, 0.0])).collect();
        let t = traj(&pts);
        let s = &speed_series(&t, 240.0)[0];
        assert!(s.samples.iter().all(|(_, v)| *v == 240.0));
        assert_eq!(path_length(&t, 0), Some(100.0));
        assert!(acceleration_series(s, 240.0).samples.iter().all(|(_, a)| *a == 0.0));
    }

    #[test]
    fn gap_uses_true_delta() {
        let t = traj(&[(1, [0.0; 3]), (4, [3.0, 0.0, 0.0])]);
        assert_eq!(speed_series(&t, 240.0)[0].samples, vec![(4, 240.0)]);
    }

    #[test]
    fn speed_ramp_gives_constant_acceleration() {
        let s = KinematicSeries { id: 1, quantity: Quantity::Speed, samples: (1..=6).map(|f| (f, 2.0 * f as f64)).collect() };
        let a = acceleration_series(&s, 10.0);
        assert_eq!(a.samples.len(), 5);
        assert!(a.samples.iter().all(|(_, v)| *v == 20.0));
        let short = KinematicSeries { samples: vec![(1, 1.0)], ..s };
        assert!(acceleration_series(&short, 10.0).samples.is_empty());
    }

    #[test]
    fn depth_of_table_row() {
        let set = Track3DSet::new(
            "129",
            vec![Track3DRecord { frame: 1, left_id: 0, right_id: 5, x: 475.641, y: -251.609, z: 2175.999 }],
            240.0,
        )
        .unwrap();
        assert_eq!(depth_series(&set)[0].samples, vec![(1, 2175.999)]);
    }

    proptest! {
        #[test]
        fn path_not_shorter_than_displacement(pts in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 1..40)) {
            let p: Vec<(u32, [f64; 3])> = pts.iter().enumerate().map(|(i, p)| (i as u32 + 1, *p)).collect();
            let t = traj(&p);
            let disp = (Vector3::from(pts[pts.len() - 1]) - Vector3::from(pts[0])).norm();
            prop_assert!(path_length(&t, 0).unwrap() >= disp - 1e-9 * (1.0 + disp));
        }

        #[test]
        fn speed_is_rigid_invariant(
            pts in prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 3..30),
            angles in prop::array::uniform3(-3.0f64..3.0),
            shift in prop::array::uniform3(-1e3f64..1e3),
        ) {
            let rot = Rotation3::from_euler_angles(angles[0], angles[1], angles[2]);
            let a: Vec<(u32, [f64; 3])> = pts.iter().enumerate().map(|(i, p)| (i as u32 + 1, *p)).collect();
            let b: Vec<(u32, [f64; 3])> = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (i as u32 + 1, (rot * Vector3::from(*p) + Vector3::from(shift)).into()))
                .collect();
            let sa = &speed_series(&traj(&a), 240.0)[0];
            let sb = &speed_series(&traj(&b), 240.0)[0];
            for (x, y) in sa.samples.iter().zip(&sb.samples) {
                prop_assert!((x.1 - y.1).abs() <= 1e-7 * (1.0 + x.1));
            }
            let aa = acceleration_series(sa, 240.0);
            let ab = acceleration_series(sb, 240.0);
            for (x, y) in aa.samples.iter().zip(&ab.samples) {
                prop_assert!((x.1 - y.1).abs() <= 1e-4 * (1.0 + x.1.abs()));
            }
        }
    }
}
