//! Track, calibration and label file formats.
//!
//! Every track representation inside the crate is the center/offset form:
//! a box is stored as its center `(cx, cy)` plus half extents `(x_off, y_off)`.
//! Raw MOT rows (top-left corner plus size) and tracker rows (corner pairs)
//! are converted on the way in.

mod calibration;
mod mot;
mod tracker;
mod yolo;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::camera::Distortion;
pub use calibration::{load_calibration, serialize_calibration, StereoRig};
pub use mot::{clean_file_name, clean_tracks, parse_clean, parse_mot, read_tracks, serialize_clean, CLEAN_HEADER};
pub use tracker::{parse_tracker_detections, parse_tracker_output, serialize_tracker_output, TrackerDetection};
pub use yolo::{export_yolo_labels, label_file_contents, YoloExport, DATA_YAML};

/// Which camera of a stereo pair a track file belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum View {
    /// Camera 1, files suffixed `_1`.
    Left,
    /// Camera 2, files suffixed `_2`.
    Right,
    #[default]
    Mono,
}

impl View {
    /// Splits a video name like `129_1` into its pair id and view.
    pub fn split_video_name(name: &str) -> (String, View) {
        if let Some(base) = name.strip_suffix("_1") {
            (base.to_string(), View::Left)
        } else if let Some(base) = name.strip_suffix("_2") {
            (base.to_string(), View::Right)
        } else {
            (name.to_string(), View::Mono)
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            View::Left => "_1",
            View::Right => "_2",
            View::Mono => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

impl ImageSize {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }
}

impl Default for ImageSize {
    /// The 1920x1080 frame size of the stereo fish recordings.
    fn default() -> Self {
        Self::new(1920, 1080)
    }
}

/// One detection of one track in one frame, in center/offset form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub frame: u32,
    pub id: u32,
    pub cx: f64,
    pub cy: f64,
    pub x_off: f64,
    pub y_off: f64,
}

impl TrackRecord {
    pub fn new(frame: u32, id: u32, cx: f64, cy: f64, x_off: f64, y_off: f64) -> Self {
        Self {
            frame,
            id,
            cx,
            cy,
            x_off,
            y_off,
        }
    }

    /// Builds a record from a MOT top-left corner and box size.
    pub fn from_top_left(frame: u32, id: u32, x_tl: f64, y_tl: f64, w: f64, h: f64) -> Self {
        Self::new(frame, id, x_tl + w / 2.0, y_tl + h / 2.0, w / 2.0, h / 2.0)
    }

    /// Builds a record from tracker corner coordinates.
    pub fn from_corners(frame: u32, id: u32, xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        let cx = (xmin + xmax) / 2.0;
        let cy = (ymin + ymax) / 2.0;
        Self::new(frame, id, cx, cy, (cx - xmin).abs(), (cy - ymin).abs())
    }

    /// `[xmin, ymin, xmax, ymax]`.
    pub fn corners(&self) -> [f64; 4] {
        [
            self.cx - self.x_off,
            self.cy - self.y_off,
            self.cx + self.x_off,
            self.cy + self.y_off,
        ]
    }

    pub fn center(&self) -> Point2<f64> {
        Point2::new(self.cx, self.cy)
    }

    pub fn width(&self) -> f64 {
        2.0 * self.x_off
    }

    pub fn height(&self) -> f64 {
        2.0 * self.y_off
    }

    /// Mean of box width and height.
    pub fn size(&self) -> f64 {
        (self.width() + self.height()) / 2.0
    }
}

/// All track records of one video from one camera.
///
/// Records are kept sorted by `(frame, id)` and each pair occurs at most once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSet {
    pub video_id: String,
    pub view: View,
    records: Vec<TrackRecord>,
    frame_count: u32,
    image_size: Option<ImageSize>,
}

impl TrackSet {
    /// Sorts and validates `records`. The frame count defaults to the last
    /// observed frame.
    pub fn new(records: Vec<TrackRecord>) -> Result<Self> {
        let mut records = records;
        records.sort_by_key(|r| (r.frame, r.id));
        for pair in records.windows(2) {
            if pair[0].frame == pair[1].frame && pair[0].id == pair[1].id {
                return Err(Error::invalid(format!(
                    "duplicate record for frame {} id {}",
                    pair[0].frame, pair[0].id
                )));
            }
        }
        if let Some(r) = records.iter().find(|r| r.frame == 0) {
            return Err(Error::invalid(format!("frame 0 for id {} (frames are 1-based)", r.id)));
        }
        let frame_count = records.iter().map(|r| r.frame).max().unwrap_or(0);
        Ok(Self {
            video_id: String::new(),
            view: View::Mono,
            records,
            frame_count,
            image_size: None,
        })
    }

    pub fn empty() -> Self {
        Self {
            video_id: String::new(),
            view: View::Mono,
            records: Vec::new(),
            frame_count: 0,
            image_size: None,
        }
    }

    pub fn with_video(mut self, video_id: impl Into<String>, view: View) -> Self {
        self.video_id = video_id.into();
        self.view = view;
        self
    }

    /// Sets the video length. Fails if a record lies beyond it.
    pub fn with_frame_count(mut self, frame_count: u32) -> Result<Self> {
        let last = self.last_frame();
        if last > frame_count {
            return Err(Error::invalid(format!(
                "record at frame {last} exceeds frame count {frame_count}"
            )));
        }
        self.frame_count = frame_count;
        Ok(self)
    }

    pub fn with_image_size(mut self, size: ImageSize) -> Self {
        self.image_size = Some(size);
        self
    }

    /// Copies the metadata of `self` onto a new record list.
    pub fn replace_records(&self, records: Vec<TrackRecord>) -> Result<Self> {
        let mut out = TrackSet::new(records)?;
        out.video_id = self.video_id.clone();
        out.view = self.view;
        out.frame_count = self.frame_count.max(out.frame_count);
        out.image_size = self.image_size;
        Ok(out)
    }

    pub fn records(&self) -> &[TrackRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TrackRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn frame_count(&self) -> u32 {
        self.frame_count
    }

    pub fn image_size(&self) -> Option<ImageSize> {
        self.image_size
    }

    fn last_frame(&self) -> u32 {
        self.records.last().map(|r| r.frame).unwrap_or(0)
    }

    /// Video name with the view suffix, e.g. `129_1`.
    pub fn video_name(&self) -> String {
        format!("{}{}", self.video_id, self.view.suffix())
    }

    pub fn ids(&self) -> BTreeSet<u32> {
        self.records.iter().map(|r| r.id).collect()
    }

    /// Records grouped per id, each group in frame order.
    pub fn by_id(&self) -> BTreeMap<u32, Vec<TrackRecord>> {
        let mut out: BTreeMap<u32, Vec<TrackRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.id).or_default().push(*r);
        }
        out
    }

    /// Records grouped per frame, each group in id order.
    pub fn by_frame(&self) -> BTreeMap<u32, Vec<TrackRecord>> {
        let mut out: BTreeMap<u32, Vec<TrackRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.frame).or_default().push(*r);
        }
        out
    }

    pub fn get(&self, frame: u32, id: u32) -> Option<&TrackRecord> {
        self.records
            .binary_search_by_key(&(frame, id), |r| (r.frame, r.id))
            .ok()
            .map(|i| &self.records[i])
    }

    /// Average box size (mean of width and height) over all records.
    pub fn mean_box_size(&self) -> Option<f64> {
        if self.records.is_empty() {
            return None;
        }
        Some(self.records.iter().map(TrackRecord::size).sum::<f64>() / self.records.len() as f64)
    }
}

impl Default for TrackSet {
    fn default() -> Self {
        Self::empty()
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            View::Left => "left",
            View::Right => "right",
            View::Mono => "mono",
        })
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Splits a data row on commas and/or whitespace.
pub(crate) fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
}

pub(crate) fn parse_number(token: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("{what}: '{token}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what}: non-finite value")));
    }
    Ok(v)
}

pub(crate) fn parse_index(token: &str, line: usize, what: &str) -> Result<u32> {
    let v = parse_number(token, line, what)?;
    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
        return Err(Error::parse(line, format!("{what}: '{token}' is not a non-negative integer")));
    }
    Ok(v as u32)
}

pub(crate) fn parse_frame(token: &str, line: usize) -> Result<u32> {
    let f = parse_index(token, line, "frame")?;
    if f == 0 {
        return Err(Error::parse(line, "frame numbers start at 1"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn video_name_suffixes() {
        assert_eq!(View::split_video_name("129_1"), ("129".into(), View::Left));
        assert_eq!(View::split_video_name("8_2"), ("8".into(), View::Right));
        assert_eq!(View::split_video_name("161"), ("161".into(), View::Mono));
    }

    #[test]
    fn duplicate_frame_id_rejected() {
        let r = TrackRecord::new(1, 3, 1.0, 1.0, 1.0, 1.0);
        assert!(TrackSet::new(vec![r, r]).is_err());
    }

    #[test]
    fn frame_count_cannot_cut_records() {
        let ts = TrackSet::new(vec![TrackRecord::new(10, 0, 1.0, 1.0, 1.0, 1.0)]).unwrap();
        assert_eq!(ts.frame_count(), 10);
        assert!(ts.clone().with_frame_count(9).is_err());
        assert_eq!(ts.with_frame_count(260).unwrap().frame_count(), 260);
    }

    #[test]
    fn corners_and_top_left_are_inverse() {
        let r = TrackRecord::from_top_left(1, 3, 100.0, 200.0, 40.0, 20.0);
        let [x0, y0, x1, y1] = r.corners();
        assert_eq!(TrackRecord::from_corners(1, 3, x0, y0, x1, y1), r);
    }
}
