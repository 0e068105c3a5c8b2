use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Degraded, SceneTruth};
use crate::error::Result;
use crate::mot_io::{serialize_calibration, serialize_tracker_output, write_text, TrackSet};

pub const CALIBRATION_FILE: &str = "calibration.txt";
pub const TRUTH_FILE: &str = "truth.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenePaths {
    pub gt_left: PathBuf,
    pub gt_right: PathBuf,
    pub tracks_left: PathBuf,
    pub tracks_right: PathBuf,
    pub calibration: PathBuf,
    pub truth: PathBuf,
}

/// Raw ground-truth rows: frame, id, top-left x/y, width, height, then
/// fixed confidence and class columns.
fn raw_mot(tracks: &TrackSet) -> String {
    let mut out = String::new();
    for r in tracks.records() {
        let [x0, y0, ..] = r.corners();
        let _ = writeln!(out, "{},{},{},{},{},{},1,1", r.frame, r.id, x0, y0, r.width(), r.height());
    }
    out
}

#[derive(Serialize)]
struct TruthDoc<'a> {
    truth: &'a SceneTruth,
    degradation: &'a Degraded,
}

/// Writes `{video}_1.txt` / `{video}_2.txt` ground truth, `{video}_1_tr.csv`
/// / `{video}_2_tr.csv` tracker output, the calibration and `truth.json`.
pub fn write_scene(dir: &Path, truth: &SceneTruth, degraded: &Degraded) -> Result<ScenePaths> {
    let vid = &truth.config.video_id;
    let paths = ScenePaths {
        gt_left: dir.join(format!("{vid}_1.txt")),
        gt_right: dir.join(format!("{vid}_2.txt")),
        tracks_left: dir.join(format!("{vid}_1_tr.csv")),
        tracks_right: dir.join(format!("{vid}_2_tr.csv")),
        calibration: dir.join(CALIBRATION_FILE),
        truth: dir.join(TRUTH_FILE),
    };
    write_text(&paths.gt_left, &raw_mot(&truth.left))?;
    write_text(&paths.gt_right, &raw_mot(&truth.right))?;
    write_text(&paths.tracks_left, &serialize_tracker_output(&degraded.left))?;
    write_text(&paths.tracks_right, &serialize_tracker_output(&degraded.right))?;
    write_text(&paths.calibration, &serialize_calibration(&truth.config.rig))?;
    let doc = serde_json::to_string_pretty(&TruthDoc { truth, degradation: degraded })?;
    write_text(&paths.truth, &(doc + "\n"))?;
    Ok(paths)
}
