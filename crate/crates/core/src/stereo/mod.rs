//! Cross-view id association with epipolar geometry.
//!
//! The fundamental matrix is derived from the stereo calibration. For every
//! frame, each left detection predicts an epipolar line in the right image;
//! the right detection closest to that line (within a pixel threshold) is its
//! per-frame match. [`consensus`] then picks, per left id, the right id it
//! was matched to most often.

mod geometry;
mod matching;

pub use geometry::{
    epipolar_line, fundamental_from_rig, point_line_distance, undistort_point, EpipolarLine,
    FundamentalMatrix, UNDISTORT_MAX_ITERATIONS,
};
pub use matching::{
    consensus, match_frame, match_tracks, parse_match_table, serialize_consensus, serialize_matches,
    ConsensusMatch, Detection, FrameMatch, MatchConfig, MatchMode,
};
