use std::path::{Path, PathBuf};

use super::{write_text, ImageSize, TrackRecord, TrackSet};
use crate::error::{Error, Result};

/// Dataset descriptor written next to the label files.
pub const DATA_YAML: &str = "train: images/train  # train images (relative to 'path')
val: images/val  # val images (relative to 'path')
nc: 1  # Number of classes (just fish)
names: ['fish']  # Your class names
";

#[derive(Debug, Clone, PartialEq)]
pub struct YoloExport {
    pub label_dir: PathBuf,
    pub data_yaml: PathBuf,
    pub files: usize,
    pub rows: usize,
}

/// Label rows `0 cx cy w h` for one frame with six decimals.
///
/// With `size` the values are divided by the image dimensions; with `None`
/// they stay in pixels.
pub fn label_file_contents(records: &[TrackRecord], size: Option<ImageSize>) -> String {
    let (sx, sy) = size
        .map(|s| (s.width as f64, s.height as f64))
        .unwrap_or((1.0, 1.0));
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "0 {:.6} {:.6} {:.6} {:.6}\n",
            r.cx / sx,
            r.cy / sy,
            r.width() / sx,
            r.height() / sy
        ));
    }
    out
}

/// Writes `out_dir/labels/frame_<n>.txt` for every frame of the video plus
/// `out_dir/data.yaml`. Frames without detections get an empty file.
pub fn export_yolo_labels(tracks: &TrackSet, out_dir: &Path, normalize: bool) -> Result<YoloExport> {
    let size = if normalize {
        Some(tracks.image_size().ok_or_else(|| {
            Error::invalid("image size unknown; required for normalized labels")
        })?)
    } else {
        None
    };
    let label_dir = out_dir.join("labels");
    std::fs::create_dir_all(&label_dir).map_err(|e| Error::io(&label_dir, e))?;
    let by_frame = tracks.by_frame();
    let mut rows = 0;
    for frame in 1..=tracks.frame_count() {
        let records = by_frame.get(&frame).map(Vec::as_slice).unwrap_or(&[]);
        rows += records.len();
        write_text(
            &label_dir.join(format!("frame_{frame}.txt")),
            &label_file_contents(records, size),
        )?;
    }
    let data_yaml = out_dir.join("data.yaml");
    write_text(&data_yaml, DATA_YAML)?;
    Ok(YoloExport {
        label_dir,
        data_yaml,
        files: tracks.frame_count() as usize,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_center_row() {
        let r = TrackRecord::new(1, 0, 960.0, 540.0, 48.0, 27.0);
        let line = label_file_contents(&[r], Some(ImageSize::new(1920, 1080)));
        assert_eq!(line, "0 0.500000 0.500000 0.050000 0.050000\n");
        let values: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
        assert_eq!(values, vec![0.0, 0.5, 0.5, 0.05, 0.05]);
    }

    #[test]
    fn raw_pixel_mode() {
        let r = TrackRecord::new(1, 0, 960.0, 540.0, 48.0, 27.0);
        assert_eq!(
            label_file_contents(&[r], None),
            "0 960.000000 540.000000 96.000000 54.000000\n"
        );
    }

    #[test]
    fn data_yaml_single_fish_class() {
        assert!(DATA_YAML.contains("nc: 1"));
        assert!(DATA_YAML.contains("names: ['fish']"));
    }

    #[test]
    fn export_writes_every_frame() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TrackSet::new(vec![
            TrackRecord::new(1, 0, 100.0, 100.0, 10.0, 10.0),
            TrackRecord::new(3, 0, 110.0, 100.0, 10.0, 10.0),
        ])
        .unwrap()
        .with_image_size(ImageSize::default());
        let ex = export_yolo_labels(&ts, dir.path(), true).unwrap();
        assert_eq!(ex.files, 3);
        assert_eq!(ex.rows, 2);
        let empty = std::fs::read_to_string(dir.path().join("labels/frame_2.txt")).unwrap();
        assert!(empty.is_empty());
        assert_eq!(std::fs::read_to_string(ex.data_yaml).unwrap(), DATA_YAML);
    }

    #[test]
    fn normalized_export_needs_image_size() {
        let dir = tempfile::tempdir().unwrap();
        let ts = TrackSet::new(vec![TrackRecord::new(1, 0, 1.0, 1.0, 1.0, 1.0)]).unwrap();
        assert!(export_yolo_labels(&ts, dir.path(), true).is_err());
        assert!(export_yolo_labels(&ts, dir.path(), false).is_ok());
    }
}
