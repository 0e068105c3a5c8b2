//! Deterministic synthetic stereo scenes with known ground truth.
//!
//! [`generate`] places fish in front of a stereo rig, moves them along
//! analytic trajectories and projects them into both views. [`degrade`]
//! then applies tracker-like failures (id fragmentation, dropouts, short
//! false-positive blips, pixel noise) and logs every change, so tests can
//! check recovery against exact targets. [`write_scene`] emits the same file
//! formats as real data.

mod degrade;
mod generate;
mod scene;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mot_io::{ImageSize, StereoRig};

pub use degrade::{degrade, BlipLog, DegradeLog, Degraded, DropoutLog, FragmentLog};
pub use generate::{default_rig, generate, random_rig, FishTruth, SceneTruth, Trajectory};
pub use scene::{write_scene, ScenePaths, CALIBRATION_FILE, TRUTH_FILE};

/// Name of the pseudo-random generator behind every synthetic scene.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryModel {
    #[default]
    Linear,
    Helical,
    RandomWalk,
}

impl std::str::FromStr for TrajectoryModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "helical" => Ok(Self::Helical),
            "random-walk" => Ok(Self::RandomWalk),
            other => Err(Error::Config(format!("unknown trajectory model {other:?}"))),
        }
    }
}

/// Which view(s) a corruption applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    #[default]
    Both,
}

impl Side {
    pub(crate) fn covers(self, left: bool) -> bool {
        matches!((self, left), (Side::Both, _) | (Side::Left, true) | (Side::Right, false))
    }
}

/// From `split_frame` on, the fish carries a fresh id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragmentation {
    pub fish: usize,
    pub split_frame: u32,
    #[serde(default)]
    pub side: Side,
}

/// The fish is not detected in `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropout {
    pub fish: usize,
    pub start: u32,
    pub end: u32,
    #[serde(default)]
    pub side: Side,
}

/// Short-lived false-positive tracks, placed per view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlipConfig {
    pub count: usize,
    pub min_len: u32,
    pub max_len: u32,
    /// Minimum pixel distance to every fish in the same view within
    /// `window` frames of the blip.
    pub clearance_px: f64,
    pub window: u32,
}

impl Default for BlipConfig {
    fn default() -> Self {
        BlipConfig { count: 0, min_len: 5, max_len: 20, clearance_px: 150.0, window: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub video_id: String,
    pub n_fish: usize,
    pub n_frames: u32,
    pub model: TrajectoryModel,
    pub rig: StereoRig,
    pub image_size: ImageSize,
    pub fps: f64,
    /// Bound on how far a fish drifts from its start, in rig units.
    pub motion_scale: f64,
    pub depth_range: (f64, f64),
    /// Physical fish box (length, height) in rig units.
    pub fish_size: (f64, f64),
    pub noise_px: f64,
    pub fragmentation: Vec<Fragmentation>,
    pub dropouts: Vec<Dropout>,
    pub blips: BlipConfig,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            video_id: "900".into(),
            n_fish: 9,
            n_frames: 260,
            model: TrajectoryModel::Linear,
            rig: default_rig(),
            image_size: ImageSize::default(),
            fps: 240.0,
            motion_scale: 80.0,
            depth_range: (1800.0, 2400.0),
            fish_size: (120.0, 50.0),
            noise_px: 0.0,
            fragmentation: Vec::new(),
            dropouts: Vec::new(),
            blips: BlipConfig::default(),
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.rig.validate()?;
        if self.n_frames == 0 {
            return bad("scene needs at least one frame".into());
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        let (z0, z1) = self.depth_range;
        if !(z0 > 0.0 && z1 >= z0 && z1.is_finite()) {
            return bad(format!("invalid depth range {z0}..{z1}"));
        }
        if !(self.motion_scale >= 0.0 && self.motion_scale.is_finite()) {
            return bad("motion scale must be non-negative".into());
        }
        if !(self.fish_size.0 > 0.0 && self.fish_size.1 > 0.0) {
            return bad("fish size must be positive".into());
        }
        if !(self.noise_px >= 0.0 && self.noise_px.is_finite()) {
            return bad("pixel noise must be non-negative".into());
        }
        for f in &self.fragmentation {
            if f.fish >= self.n_fish || f.split_frame < 2 || f.split_frame > self.n_frames {
                return bad(format!("fragmentation {f:?} outside the scene"));
            }
        }
        for d in &self.dropouts {
            if d.fish >= self.n_fish || d.start < 1 || d.end < d.start || d.end > self.n_frames {
                return bad(format!("dropout {d:?} outside the scene"));
            }
        }
        let b = &self.blips;
        if b.count > 0 && (b.min_len == 0 || b.max_len < b.min_len || b.max_len > self.n_frames) {
            return bad(format!("blip lengths {}..={} do not fit the scene", b.min_len, b.max_len));
        }
        Ok(())
    }
}
