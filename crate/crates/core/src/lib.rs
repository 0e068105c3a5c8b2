//! Post-tracking analytics for stereo multi-object tracking.
//!
//! The crate starts where a single-view detector/tracker stops: it reads
//! per-camera MOT track files, repairs fragmented identities, matches ids
//! across the two views with epipolar geometry, triangulates matched tracks
//! into 3D and evaluates tracking quality against ground truth.
//!
//! Module map:
//!
//! * [`mot_io`]: MOT, clean, tracker-output, YOLO label and calibration formats
//! * [`reid`]: post-track re-identification, false-positive pruning, id compaction
//! * [`stereo`]: fundamental matrix, undistortion, epipolar matching, consensus
//! * [`triangulate`]: linear triangulation of matched tracks
//! * [`metrics`]: id mapping, MOTA, IDF1, HOTA components, margin and completeness reports
//! * [`kinematics`]: speed, acceleration, path length, density and plot data
//! * [`synth`]: deterministic synthetic stereo scenes used as test oracles
//! * [`pipeline`]: stage runners, configuration and run manifests behind the CLI

pub mod assignment;
pub mod cli;
pub mod camera;
pub mod config;
pub mod error;
pub mod kinematics;
pub mod metrics;
pub mod mot_io;
pub mod pipeline;
pub mod reid;
pub mod stereo;
pub mod synth;
pub mod triangulate;

pub use error::{Error, Result};
pub use mot_io::{StereoRig, TrackRecord, TrackSet, View};
