//! Linear (DLT) triangulation of matched stereo tracks.
//!
//! Camera 1 is the world frame. Coordinates come out in calibration length
//! units (assumed millimetres); no axis flip is applied, so `y` grows
//! downwards like image rows.

use std::collections::BTreeMap;

use nalgebra::{Matrix3x4, Matrix4, Point2, Point3, RowVector4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mot_io::{parse_frame, parse_index, parse_number, split_fields, StereoRig, TrackSet};
use crate::stereo::{undistort_point, ConsensusMatch};

/// Homogeneous weights at or below this magnitude mark a point at infinity.
pub const INFINITY_EPS: f64 = 1e-12;

/// `P1 = K1 [I | 0]`, `P2 = K2 [R | t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionPair {
    pub p1: Matrix3x4<f64>,
    pub p2: Matrix3x4<f64>,
}

impl ProjectionPair {
    pub fn new(p1: Matrix3x4<f64>, p2: Matrix3x4<f64>) -> Self {
        Self { p1, p2 }
    }

    /// Ideal (undistorted) pixel projections of a world point.
    pub fn project(&self, x: &Point3<f64>) -> (Point2<f64>, Point2<f64>) {
        let h = x.to_homogeneous();
        let a = self.p1 * h;
        let b = self.p2 * h;
        (Point2::new(a.x / a.z, a.y / a.z), Point2::new(b.x / b.z, b.y / b.z))
    }
}

pub fn projection_pair(rig: &StereoRig) -> ProjectionPair {
    let mut rt1 = Matrix3x4::zeros();
    rt1.fixed_view_mut::<3, 3>(0, 0).copy_from(&nalgebra::Matrix3::identity());
    let mut rt2 = Matrix3x4::zeros();
    rt2.fixed_view_mut::<3, 3>(0, 0).copy_from(&rig.rotation);
    rt2.set_column(3, &rig.translation);
    ProjectionPair::new(rig.k1 * rt1, rig.k2 * rt2)
}

/// Solves the 4x4 DLT system for two undistorted pixel observations and
/// returns the unit-norm homogeneous point.
///
/// Fails when the null space is more than one-dimensional (identical
/// camera centers or degenerate rays).
pub fn triangulate_point(pair: &ProjectionPair, x1: &Point2<f64>, x2: &Point2<f64>) -> Result<Vector4<f64>> {
    let row = |p: &Matrix3x4<f64>, coord: f64, i: usize| -> RowVector4<f64> { p.row(2) * coord - p.row(i) };
    // Rows are not equalized: with a near-rectified rig the y-rows carry
    // little depth information, and unit-norm rows let y noise dominate.
    let a = Matrix4::from_rows(&[
        row(&pair.p1, x1.x, 0),
        row(&pair.p1, x1.y, 1),
        row(&pair.p2, x2.x, 0),
        row(&pair.p2, x2.y, 1),
    ]);
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite triangulation input"));
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::numerical("SVD failed"))?;
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let largest = svd.singular_values[order[3]];
    let second = svd.singular_values[order[1]];
    if largest == 0.0 || second <= 1e-12 * largest {
        return Err(Error::numerical("rank-deficient triangulation system"));
    }
    let h: Vector4<f64> = v_t.row(order[0]).transpose();
    // Fix the sign so that finite points have w > 0.
    Ok(if h.w < 0.0 { -h } else { h })
}

/// `(X/w, Y/w, Z/w)`; fails for points at infinity.
pub fn to_cartesian(h: &Vector4<f64>) -> Result<Point3<f64>> {
    if h.w.abs() <= INFINITY_EPS {
        return Err(Error::numerical("point at infinity (w = 0)"));
    }
    Ok(Point3::new(h.x / h.w, h.y / h.w, h.z / h.w))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Track3DRecord {
    pub frame: u32,
    pub left_id: u32,
    pub right_id: u32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Track3DRecord {
    pub fn position(&self) -> Point3<f64> {
        Point3::new(self.x, self.y, self.z)
    }
}

/// Triangulated tracks of one stereo video, keyed by the left id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track3DSet {
    pub video_id: String,
    pub records: Vec<Track3DRecord>,
    pub fps: f64,
}

impl Track3DSet {
    pub const DEFAULT_FPS: f64 = 240.0;

    pub fn new(video_id: impl Into<String>, mut records: Vec<Track3DRecord>, fps: f64) -> Result<Self> {
        records.sort_by_key(|r| (r.frame, r.left_id));
        if let Some(w) = records.windows(2).find(|w| (w[0].frame, w[0].left_id) == (w[1].frame, w[1].left_id)) {
            return Err(Error::invalid(format!(
                "duplicate 3D record for frame {} left id {}",
                w[0].frame, w[0].left_id
            )));
        }
        if let Some(r) = records.iter().find(|r| !(r.x.is_finite() && r.y.is_finite() && r.z.is_finite())) {
            return Err(Error::invalid(format!("non-finite 3D record at frame {}", r.frame)));
        }
        Ok(Self {
            video_id: video_id.into(),
            records,
            fps,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangulationStats {
    pub attempted: usize,
    pub triangulated: usize,
    pub failed: usize,
}

/// Triangulates every frame in which a left id and its matched right id are
/// both present. Frames missing either side produce no record; points that
/// fail to triangulate are logged and skipped.
pub fn triangulate_tracks(
    left: &TrackSet,
    right: &TrackSet,
    matches: &[ConsensusMatch],
    rig: &StereoRig,
) -> Result<(Track3DSet, TriangulationStats)> {
    let pair = projection_pair(rig);
    let partner: BTreeMap<u32, u32> = matches.iter().map(|m| (m.left_id, m.right_id)).collect();
    let mut stats = TriangulationStats::default();
    let mut records = Vec::new();
    for l in left.records() {
        let Some(&right_id) = partner.get(&l.id) else { continue };
        let Some(r) = right.get(l.frame, right_id) else { continue };
        stats.attempted += 1;
        let attempt = undistort_point(&l.center(), &rig.k1, &rig.dist1)
            .and_then(|x1| Ok((x1, undistort_point(&r.center(), &rig.k2, &rig.dist2)?)))
            .and_then(|(x1, x2)| triangulate_point(&pair, &x1, &x2))
            .and_then(|h| to_cartesian(&h));
        match attempt {
            Ok(p) => {
                stats.triangulated += 1;
                records.push(Track3DRecord {
                    frame: l.frame,
                    left_id: l.id,
                    right_id,
                    x: p.x,
                    y: p.y,
                    z: p.z,
                });
            }
            Err(e) => {
                stats.failed += 1;
                log::warn!("frame {} left {} right {}: {e}", l.frame, l.id, right_id);
            }
        }
    }
    let set = Track3DSet::new(left.video_id.clone(), records, Track3DSet::DEFAULT_FPS)?;
    Ok((set, stats))
}

pub const TRACK3D_HEADER: &str = "frame,left_id,right_id,x,y,z";

/// CSV with three decimals per coordinate.
pub fn serialize_tracks3d(set: &Track3DSet) -> String {
    let mut out = format!("{TRACK3D_HEADER}\n");
    for r in &set.records {
        out.push_str(&format!(
            "{},{},{},{:.3},{:.3},{:.3}\n",
            r.frame, r.left_id, r.right_id, r.x, r.y, r.z
        ));
    }
    out
}

pub fn parse_tracks3d(text: &str, video_id: &str, fps: f64) -> Result<Track3DSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == TRACK3D_HEADER => {}
        Some((i, _)) => return Err(Error::parse(i + 1, format!("expected header '{TRACK3D_HEADER}'"))),
        None => return Err(Error::parse(1, "empty 3D track file")),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let n = idx + 1;
        let f: Vec<&str> = split_fields(line).collect();
        if f.len() != 6 {
            return Err(Error::parse(n, format!("expected 6 columns, found {}", f.len())));
        }
        records.push(Track3DRecord {
            frame: parse_frame(f[0], n)?,
            left_id: parse_index(f[1], n, "left_id")?,
            right_id: parse_index(f[2], n, "right_id")?,
            x: parse_number(f[3], n, "x")?,
            y: parse_number(f[4], n, "y")?,
            z: parse_number(f[5], n, "z")?,
        });
    }
    Track3DSet::new(video_id, records, fps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::Distortion;
    use nalgebra::{Matrix3, Vector3};

    fn rig(f: f64, baseline: f64) -> StereoRig {
        let k = Matrix3::new(f, 0.0, 0.0, 0.0, f, 0.0, 0.0, 0.0, 1.0);
        StereoRig::new(k, k, Distortion::none(), Distortion::none(), Matrix3::identity(), Vector3::new(-baseline, 0.0, 0.0))
            .unwrap()
    }

    #[test]
    fn noisy_points_stay_within_one_percent_of_depth() {
        use rand::{Rng, SeedableRng};
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let pair = projection_pair(&crate::synth::default_rig());
        let mut rel: Vec<f64> = (0..1000)
            .map(|_| {
                let x = Point3::new(rng.random_range(-600.0..600.0), rng.random_range(-400.0..400.0), rng.random_range(2200.0..2600.0));
                let (a, b) = pair.project(&x);
                let jitter = |p: Point2<f64>, rng: &mut rand_chacha::ChaCha8Rng| {
                    Point2::new(p.x + noise.sample(rng), p.y + noise.sample(rng))
                };
                let (a, b) = (jitter(a, &mut rng), jitter(b, &mut rng));
                let p = to_cartesian(&triangulate_point(&pair, &a, &b).unwrap()).unwrap();
                (p - x).norm() / x.z
            })
            .collect();
        rel.sort_by(f64::total_cmp);
        assert!(rel[500] < 0.01, "median {}", rel[500]);
    }

    #[test]
    fn identity_rig_projection_matrices() {
        let r = StereoRig::new(
            Matrix3::identity(),
            Matrix3::identity(),
            Distortion::none(),
            Distortion::none(),
            Matrix3::identity(),
            Vector3::new(-1.0, 0.0, 0.0),
        )
        .unwrap();
        let pair = projection_pair(&r);
        assert_eq!(pair.p1, Matrix3x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0));
        assert_eq!(pair.p2, Matrix3x4::new(1.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn rectified_depth_from_disparity() {
        let (f, b) = (1500.0, 100.0);
        let pair = projection_pair(&rig(f, b));
        for &(x, y, z) in &[(0.0, 0.0, 2000.0), (250.0, -120.0, 1800.0), (-40.0, 300.0, 3100.0)] {
            let truth = Point3::new(x, y, z);
            let (x1, x2) = pair.project(&truth);
            let disparity = x1.x - x2.x;
            let depth = f * b / disparity;
            let p = to_cartesian(&triangulate_point(&pair, &x1, &x2).unwrap()).unwrap();
            assert!((p - truth).norm() < 1e-9, "{p} vs {truth}");
            assert!((p.z - depth).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_disparity_is_at_infinity() {
        let pair = projection_pair(&rig(1500.0, 100.0));
        let x = Point2::new(10.0, 20.0);
        let h = triangulate_point(&pair, &x, &x).unwrap();
        assert!(h.w.abs() < INFINITY_EPS);
        assert!(to_cartesian(&h).is_err());
    }

    #[test]
    fn identical_centers_are_rank_deficient() {
        let k = Matrix3::identity();
        let rt = {
            let mut m = Matrix3x4::zeros();
            m.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
            m
        };
        let pair = ProjectionPair::new(k * rt, k * rt);
        let x = Point2::new(0.1, 0.2);
        assert!(triangulate_point(&pair, &x, &x).is_err());
    }

    #[test]
    fn cartesian_conversion() {
        assert_eq!(to_cartesian(&Vector4::new(2.0, 4.0, 6.0, 2.0)).unwrap(), Point3::new(1.0, 2.0, 3.0));
        assert!(to_cartesian(&Vector4::new(1.0, 1.0, 1.0, 0.0)).is_err());
        let h = Vector4::new(2.0, 4.0, 6.0, 2.0);
        assert_eq!(to_cartesian(&(h * -3.0)).unwrap(), to_cartesian(&h).unwrap());
    }

    #[test]
    fn common_scaling_of_projections() {
        let pair = projection_pair(&rig(1200.0, 80.0));
        let scaled = ProjectionPair::new(pair.p1 * 7.5, pair.p2 * 7.5);
        let truth = Point3::new(120.0, -60.0, 1700.0);
        let (x1, x2) = pair.project(&truth);
        let a = to_cartesian(&triangulate_point(&pair, &x1, &x2).unwrap()).unwrap();
        let b = to_cartesian(&triangulate_point(&scaled, &x1, &x2).unwrap()).unwrap();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn csv_has_table_columns() {
        let set = Track3DSet::new(
            "129",
            vec![Track3DRecord { frame: 1, left_id: 0, right_id: 5, x: 475.641, y: -251.609, z: 2175.999 }],
            240.0,
        )
        .unwrap();
        let text = serialize_tracks3d(&set);
        assert_eq!(text, "frame,left_id,right_id,x,y,z\n1,0,5,475.641,-251.609,2175.999\n");
        assert_eq!(parse_tracks3d(&text, "129", 240.0).unwrap(), set);
    }

    #[test]
    fn empty_matches_give_empty_set() {
        let ts = TrackSet::new(vec![crate::TrackRecord::new(1, 0, 1.0, 1.0, 1.0, 1.0)]).unwrap();
        let (set, stats) = triangulate_tracks(&ts, &ts, &[], &rig(1000.0, 100.0)).unwrap();
        assert!(set.is_empty());
        assert_eq!(stats, TriangulationStats::default());
    }
}
