use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::{Matrix3, Point3, Rotation3, Unit, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{SceneConfig, TrajectoryModel};
use crate::camera::{project, Distortion};
use crate::error::{Error, Result};
use crate::mot_io::{StereoRig, TrackRecord, TrackSet, View};

/// Analytic description of a fish path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Trajectory {
    Linear {
        start: Point3<f64>,
        velocity: Vector3<f64>,
    },
    /// `p(t) = c + r (cos θ e1 + sin θ e2) + pitch θ a` with
    /// `θ(t) = theta0 + omega t + beta t² / 2`.
    Helical {
        center: Point3<f64>,
        e1: Vector3<f64>,
        e2: Vector3<f64>,
        axis: Vector3<f64>,
        radius: f64,
        pitch: f64,
        theta0: f64,
        omega: f64,
        beta: f64,
    },
    RandomWalk,
}

impl Trajectory {
    fn theta(&self, t: f64) -> Option<f64> {
        match *self {
            Trajectory::Helical { theta0, omega, beta, .. } => Some(theta0 + omega * t + 0.5 * beta * t * t),
            _ => None,
        }
    }

    fn position(&self, t: f64) -> Option<Point3<f64>> {
        match self {
            Trajectory::Linear { start, velocity } => Some(start + velocity * t),
            Trajectory::Helical { center, e1, e2, axis, radius, pitch, .. } => {
                let th = self.theta(t)?;
                Some(center + (e1 * th.cos() + e2 * th.sin()) * *radius + axis * (pitch * th))
            }
            Trajectory::RandomWalk => None,
        }
    }

    /// Speed at time `t` in rig units per second.
    pub fn speed(&self, t: f64) -> Option<f64> {
        match *self {
            Trajectory::Linear { velocity, .. } => Some(velocity.norm()),
            Trajectory::Helical { radius, pitch, omega, beta, .. } => {
                Some(radius.hypot(pitch) * (omega + beta * t).abs())
            }
            Trajectory::RandomWalk => None,
        }
    }

    /// Rate of change of speed; constant for both analytic models.
    pub fn speed_derivative(&self) -> Option<f64> {
        match *self {
            Trajectory::Linear { .. } => Some(0.0),
            Trajectory::Helical { radius, pitch, beta, .. } => Some(radius.hypot(pitch) * beta),
            Trajectory::RandomWalk => None,
        }
    }

    /// Path length between `t0` and `t1` (angular speed must not change
    /// sign in between).
    pub fn arc_length(&self, t0: f64, t1: f64) -> Option<f64> {
        match *self {
            Trajectory::Linear { velocity, .. } => Some(velocity.norm() * (t1 - t0).abs()),
            Trajectory::Helical { radius, pitch, .. } => {
                Some(radius.hypot(pitch) * (self.theta(t1)? - self.theta(t0)?).abs())
            }
            Trajectory::RandomWalk => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FishTruth {
    pub fish: usize,
    pub left_id: u32,
    pub right_id: u32,
    pub trajectory: Trajectory,
    /// Position at frames `1..=n_frames`, camera-1 coordinates.
    pub positions: Vec<Point3<f64>>,
}

impl FishTruth {
    pub fn position(&self, frame: u32) -> Option<Point3<f64>> {
        self.positions.get(frame.checked_sub(1)? as usize).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub config: SceneConfig,
    pub rng: String,
    pub fish: Vec<FishTruth>,
    /// Noise-free projections, with boxes sized by depth.
    #[serde(skip)]
    pub left: TrackSet,
    #[serde(skip)]
    pub right: TrackSet,
    /// left id -> right id
    pub correspondence: BTreeMap<u32, u32>,
}

impl SceneTruth {
    pub fn time(&self, frame: u32) -> f64 {
        (frame as f64 - 1.0) / self.config.fps
    }

    pub fn fish_by_left_id(&self, id: u32) -> Option<&FishTruth> {
        self.fish.iter().find(|f| f.left_id == id)
    }
}

/// Near-rectified rig: 1800 px focal length, 120 unit baseline, a slight
/// convergence and mild lens distortion.
pub fn default_rig() -> StereoRig {
    let k1 = Matrix3::new(1800.0, 0.0, 960.0, 0.0, 1800.0, 540.0, 0.0, 0.0, 1.0);
    let k2 = Matrix3::new(1805.0, 0.0, 955.0, 0.0, 1803.0, 545.0, 0.0, 0.0, 1.0);
    let rotation = Rotation3::from_euler_angles(0.002, 0.03, 0.001).into_inner();
    let center2 = Vector3::new(120.0, 1.0, -2.0);
    StereoRig::new(
        k1,
        k2,
        Distortion { k1: -0.04, k2: 0.01, p1: 2e-4, p2: -1e-4, k3: 0.0 },
        Distortion { k1: -0.035, k2: 0.008, p1: -1e-4, p2: 1e-4, k3: 0.0 },
        rotation,
        -(rotation * center2),
    )
    .expect("default rig is valid")
}

/// A random but plausible rig: both cameras facing the scene, baseline
/// 50 to 300 units, rotations up to about 6 degrees.
pub fn random_rig<R: Rng + ?Sized>(rng: &mut R) -> StereoRig {
    let k = |rng: &mut R| {
        let f = rng.random_range(800.0..2500.0);
        Matrix3::new(
            f,
            rng.random_range(-1.0..1.0),
            rng.random_range(800.0..1100.0),
            0.0,
            f * rng.random_range(0.98..1.02),
            rng.random_range(450.0..650.0),
            0.0,
            0.0,
            1.0,
        )
    };
    let k1 = k(rng);
    let k2 = k(rng);
    let angles: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.1..0.1));
    let rotation = Rotation3::from_euler_angles(angles[0], angles[1], angles[2]).into_inner();
    let dir = Vector3::new(1.0, rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)).normalize();
    let center2 = dir * rng.random_range(50.0..300.0);
    StereoRig::new(k1, k2, Distortion::none(), Distortion::none(), rotation, -(rotation * center2))
        .expect("random rig is valid")
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| StandardNormal.sample(rng));
        if v.norm() > 1e-6 {
            return v.normalize();
        }
    }
}

fn trajectory(cfg: &SceneConfig, start: Point3<f64>, rng: &mut ChaCha8Rng) -> (Trajectory, Vec<Point3<f64>>) {
    let n = cfg.n_frames as usize;
    let duration = ((cfg.n_frames - 1) as f64 / cfg.fps).max(1.0 / cfg.fps);
    let times: Vec<f64> = (0..n).map(|i| i as f64 / cfg.fps).collect();
    let ms = cfg.motion_scale;
    match cfg.model {
        TrajectoryModel::Linear => {
            let velocity = unit_vector(rng) * (ms * rng.random_range(0.5..1.0) / duration);
            let tr = Trajectory::Linear { start, velocity };
            let pos = times.iter().map(|t| tr.position(*t).unwrap()).collect();
            (tr, pos)
        }
        TrajectoryModel::Helical => {
            let axis = unit_vector(rng);
            let e1 = Unit::new_normalize(axis.cross(&Vector3::new(0.3, 1.0, 0.2))).into_inner();
            let e2 = axis.cross(&e1);
            let (radius, pitch) = (ms / 3.0, ms / 16.0);
            let theta0 = rng.random_range(0.0..TAU);
            let omega = rng.random_range(1.5..2.5) / duration;
            let beta = 2.0 * rng.random_range(0.5..1.0) / (duration * duration);
            let center = start - (e1 * theta0.cos() + e2 * theta0.sin()) * radius - axis * (pitch * theta0);
            let tr = Trajectory::Helical { center, e1, e2, axis, radius, pitch, theta0, omega, beta };
            let pos = times.iter().map(|t| tr.position(*t).unwrap()).collect();
            (tr, pos)
        }
        TrajectoryModel::RandomWalk => {
            let mut offsets = vec![Vector3::zeros(); n];
            for i in 1..n {
                let step: Vector3<f64> = Vector3::from_fn(|_, _| StandardNormal.sample(rng));
                offsets[i] = offsets[i - 1] + step;
            }
            let max = offsets.iter().map(|o| o.norm()).fold(0.0, f64::max);
            let scale = if max > 0.0 { ms * rng.random_range(0.5..1.0) / max } else { 0.0 };
            let pos = offsets.iter().map(|o| start + o * scale).collect();
            (Trajectory::RandomWalk, pos)
        }
    }
}

fn view_record(cfg: &SceneConfig, left: bool, frame: u32, id: u32, p: &Point3<f64>) -> Result<Option<TrackRecord>> {
    let rig = &cfg.rig;
    let (k, d, pc) = if left {
        (&rig.k1, &rig.dist1, *p)
    } else {
        (&rig.k2, &rig.dist2, Point3::from(rig.rotation * p.coords + rig.translation))
    };
    let c = project(k, d, &pc)?;
    let (w, h) = (cfg.image_size.width as f64, cfg.image_size.height as f64);
    if !(c.x >= 0.0 && c.x < w && c.y >= 0.0 && c.y < h) {
        return Ok(None);
    }
    let x_off = 0.5 * k[(0, 0)] * cfg.fish_size.0 / pc.z;
    let y_off = 0.5 * k[(1, 1)] * cfg.fish_size.1 / pc.z;
    Ok(Some(TrackRecord::new(frame, id, c.x, c.y, x_off, y_off)))
}

/// Builds a noise-free scene.
///
/// Fish start on a staggered grid covering the left image (one vertical
/// band per fish within each grid row) at random depths, then follow the
/// configured trajectory model. Left and right ids are independent random
/// permutations starting at 1.
pub fn generate(cfg: &SceneConfig) -> Result<SceneTruth> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_fish;
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(cols).max(1);
    let (w, h) = (cfg.image_size.width as f64, cfg.image_size.height as f64);
    let k = &cfg.rig.k1;

    let mut left_ids: Vec<u32> = (1..=n as u32).collect();
    let mut right_ids = left_ids.clone();
    left_ids.shuffle(&mut rng);
    right_ids.shuffle(&mut rng);

    let mut fish = Vec::with_capacity(n);
    let (mut left_recs, mut right_recs) = (Vec::new(), Vec::new());
    for i in 0..n {
        let (r, c) = (i / cols, i % cols);
        let band = h / (rows * cols) as f64;
        let u = w * (c as f64 + 0.5) / cols as f64 + rng.random_range(-15.0..15.0);
        let v = h * (r as f64 + 0.5) / rows as f64 + (c as f64 - (cols as f64 - 1.0) / 2.0) * 0.5 * band
            + rng.random_range(-5.0..5.0);
        let z = rng.random_range(cfg.depth_range.0..=cfg.depth_range.1);
        let x = (u - k[(0, 2)] - k[(0, 1)] * (v - k[(1, 2)]) / k[(1, 1)]) * z / k[(0, 0)];
        let start = Point3::new(x, (v - k[(1, 2)]) * z / k[(1, 1)], z);
        let (traj, positions) = trajectory(cfg, start, &mut rng);
        let mut visible = false;
        for (f, p) in positions.iter().enumerate() {
            let frame = f as u32 + 1;
            if let Some(rec) = view_record(cfg, true, frame, left_ids[i], p)? {
                left_recs.push(rec);
                visible = true;
            }
            if let Some(rec) = view_record(cfg, false, frame, right_ids[i], p)? {
                right_recs.push(rec);
                visible = true;
            }
        }
        if !visible {
            return Err(Error::Config(format!("fish {i} never projects into either image")));
        }
        fish.push(FishTruth { fish: i, left_id: left_ids[i], right_id: right_ids[i], trajectory: traj, positions });
    }

    let build = |recs: Vec<TrackRecord>, view: View| -> Result<TrackSet> {
        Ok(TrackSet::new(recs)?
            .with_video(cfg.video_id.clone(), view)
            .with_frame_count(cfg.n_frames)?
            .with_image_size(cfg.image_size))
    };
    Ok(SceneTruth {
        correspondence: fish.iter().map(|f| (f.left_id, f.right_id)).collect(),
        left: build(left_recs, View::Left)?,
        right: build(right_recs, View::Right)?,
        config: cfg.clone(),
        rng: super::RNG_ALGORITHM.into(),
        fish,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stereo::{fundamental_from_rig, undistort_point};
    use crate::synth::TrajectoryModel;

    #[test]
    fn deterministic_for_seed() {
        let cfg = SceneConfig { seed: 7, ..Default::default() };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = generate(&SceneConfig { seed: 8, ..Default::default() }).unwrap();
        assert_ne!(generate(&cfg).unwrap().fish, other.fish);
    }

    #[test]
    fn default_scene_is_fully_visible() {
        for model in [TrajectoryModel::Linear, TrajectoryModel::Helical, TrajectoryModel::RandomWalk] {
            let t = generate(&SceneConfig { model, seed: 3, ..Default::default() }).unwrap();
            assert_eq!(t.left.len(), 9 * 260);
            assert_eq!(t.right.len(), 9 * 260);
            assert_eq!(t.left.ids().len(), 9);
        }
    }

    #[test]
    fn single_linear_fish_satisfies_epipolar_constraint() {
        let cfg = SceneConfig { n_fish: 1, seed: 11, ..Default::default() };
        let t = generate(&cfg).unwrap();
        let f = fundamental_from_rig(&cfg.rig).unwrap();
        for (l, r) in t.left.records().iter().zip(t.right.records()) {
            let x1 = undistort_point(&l.center(), &cfg.rig.k1, &cfg.rig.dist1).unwrap();
            let x2 = undistort_point(&r.center(), &cfg.rig.k2, &cfg.rig.dist2).unwrap();
            assert!(f.residual(&x1, &x2).abs() < 1e-9);
        }
    }

    #[test]
    fn helix_closed_forms_match_samples() {
        let cfg = SceneConfig { model: TrajectoryModel::Helical, n_fish: 1, seed: 5, ..Default::default() };
        let t = generate(&cfg).unwrap();
        let fish = &t.fish[0];
        let dt = 1.0 / cfg.fps;
        // Chords fall short of the arc by about (dθ)²/24 relative, dθ ≈ 0.02 per frame.
        let mut len = 0.0;
        for w in fish.positions.windows(2) {
            len += (w[1] - w[0]).norm();
        }
        let exact = fish.trajectory.arc_length(0.0, t.time(cfg.n_frames)).unwrap();
        assert!((len - exact).abs() / exact < 1e-4);
        let v = (fish.positions[101] - fish.positions[100]).norm() / dt;
        let exact_v = fish.trajectory.speed(t.time(101) + 0.5 * dt).unwrap();
        assert!((v - exact_v).abs() / exact_v < 1e-4);
    }
}
