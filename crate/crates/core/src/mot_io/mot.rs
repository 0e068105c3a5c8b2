use std::path::{Path, PathBuf};

use super::tracker::parse_tracker_output;
use super::{parse_frame, parse_index, parse_number, read_text, split_fields, TrackRecord, TrackSet, View};
use crate::error::{Error, Result};

/// Header line of a clean track file.
pub const CLEAN_HEADER: &str = "frame,id,cx,cy,x_off,y_off";

/// Parses a raw MOT file: `frame, id, x_tl, y_tl, w, h, ...` without header.
///
/// Columns beyond the sixth are ignored. Both comma and whitespace
/// delimiters are accepted.
pub fn parse_mot(text: &str) -> Result<TrackSet> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = split_fields(line).collect();
        if fields.len() < 6 {
            return Err(Error::parse(
                line_no,
                format!("expected at least 6 columns, found {}", fields.len()),
            ));
        }
        let frame = parse_frame(fields[0], line_no)?;
        let id = parse_index(fields[1], line_no, "id")?;
        let x = parse_number(fields[2], line_no, "x")?;
        let y = parse_number(fields[3], line_no, "y")?;
        let w = parse_number(fields[4], line_no, "width")?;
        let h = parse_number(fields[5], line_no, "height")?;
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::parse(line_no, format!("non-positive box size {w}x{h}")));
        }
        records.push((line_no, TrackRecord::from_top_left(frame, id, x, y, w, h)));
    }
    build(records)
}

/// Parses a clean file (header plus `frame,id,cx,cy,x_off,y_off` rows).
pub fn parse_clean(text: &str) -> Result<TrackSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == CLEAN_HEADER => {}
        Some((idx, _)) => return Err(Error::parse(idx + 1, format!("expected header '{CLEAN_HEADER}'"))),
        None => return Err(Error::parse(1, "empty clean file (header missing)")),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = split_fields(line).collect();
        if fields.len() != 6 {
            return Err(Error::parse(line_no, format!("expected 6 columns, found {}", fields.len())));
        }
        let frame = parse_frame(fields[0], line_no)?;
        let id = parse_index(fields[1], line_no, "id")?;
        let cx = parse_number(fields[2], line_no, "cx")?;
        let cy = parse_number(fields[3], line_no, "cy")?;
        let x_off = parse_number(fields[4], line_no, "x_off")?;
        let y_off = parse_number(fields[5], line_no, "y_off")?;
        if x_off <= 0.0 || y_off <= 0.0 {
            return Err(Error::parse(line_no, "offsets must be positive"));
        }
        records.push((line_no, TrackRecord::new(frame, id, cx, cy, x_off, y_off)));
    }
    build(records)
}

fn build(records: Vec<(usize, TrackRecord)>) -> Result<TrackSet> {
    let mut seen = std::collections::HashMap::with_capacity(records.len());
    for (line, r) in &records {
        if let Some(first) = seen.insert((r.frame, r.id), *line) {
            return Err(Error::parse(
                *line,
                format!("duplicate frame {} id {} (first seen on line {first})", r.frame, r.id),
            ));
        }
    }
    TrackSet::new(records.into_iter().map(|(_, r)| r).collect())
}

/// Writes the clean representation. Floats use the shortest text that
/// parses back to the same value, so the output re-parses exactly.
pub fn serialize_clean(tracks: &TrackSet) -> String {
    let mut out = String::with_capacity(32 * (tracks.len() + 1));
    out.push_str(CLEAN_HEADER);
    out.push('\n');
    for r in tracks.records() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.frame, r.id, r.cx, r.cy, r.x_off, r.y_off
        ));
    }
    out
}

/// Cleans a raw track set: returns it together with its clean-file text.
pub fn clean_tracks(raw: &TrackSet) -> (TrackSet, String) {
    (raw.clone(), serialize_clean(raw))
}

/// `dir/name.txt` -> `dir/name_clean.txt`.
pub fn clean_file_name(raw: &Path) -> PathBuf {
    let stem = raw
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    raw.with_file_name(format!("{stem}_clean.txt"))
}

/// Reads a clean file, tracker output or raw MOT file and tags it with the
/// video id and view encoded in the file name.
///
/// Clean and tracker files are recognized by their header; headerless
/// tracker output must be named `*_tr.*`. Anything else is raw MOT.
pub fn read_tracks(path: &Path) -> Result<TrackSet> {
    let text = read_text(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tracks = if first == CLEAN_HEADER {
        parse_clean(&text)
    } else if first.starts_with("frame,id,xmin") || stem.ends_with("_tr") {
        parse_tracker_output(&text)
    } else {
        parse_mot(&text)
    }
    .map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })?;
    let (video, view) = video_from_path(path);
    Ok(tracks.with_video(video, view))
}

/// Derives `(video_id, view)` from names like `129_1.txt`, `129_1_clean.txt`
/// or `8_2_tr.csv`.
pub(crate) fn video_from_path(path: &Path) -> (String, View) {
    let mut stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    for suffix in ["_clean", "_reid", "_tr", "_gt"] {
        while let Some(s) = stem.strip_suffix(suffix) {
            stem = s.to_string();
        }
    }
    View::split_video_name(&stem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn converts_top_left_to_center_offset() {
        let ts = parse_mot("1,3,100,200,40,20").unwrap();
        assert_eq!(ts.records(), &[TrackRecord::new(1, 3, 120.0, 210.0, 20.0, 10.0)]);
    }

    #[test]
    fn unit_box_at_origin() {
        let ts = parse_mot("1,3,0,0,2,2").unwrap();
        assert_eq!(ts.records(), &[TrackRecord::new(1, 3, 1.0, 1.0, 1.0, 1.0)]);
    }

    #[test]
    fn accepts_whitespace_and_trailing_columns() {
        let ts = parse_mot("1 3 100 200 40 20 1 -1\n2\t3\t101\t200\t40\t20\t1\t-1\n").unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts.records()[1].cx, 121.0);
    }

    #[test]
    fn reports_bad_line_number() {
        let err = parse_mot("1,3,100,200,40,20\n2,3,abc,200,40,20\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_mot("1,3,100,200,40\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_non_positive_size_and_duplicates() {
        assert!(parse_mot("1,3,100,200,0,20").is_err());
        assert!(parse_mot("1,3,100,200,10,-2").is_err());
        let err = parse_mot("1,3,100,200,10,20\n1,3,0,0,5,5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn raw_file_cleans_to_headered_six_columns() {
        let raw = "1,1,794.2,47.5,71.2,174.8,1,-1,-1,-1\n\
                   1,2,164.1,19.6,66.5,163.2,1,-1,-1,-1\n\
                   2,1,795.0,48.1,71.0,174.0,1,-1,-1,-1\n";
        let (clean, text) = clean_tracks(&parse_mot(raw).unwrap());
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CLEAN_HEADER));
        for line in lines.by_ref() {
            assert_eq!(line.split(',').count(), 6);
        }
        assert_eq!(parse_clean(&text).unwrap(), clean);
    }

    #[test]
    fn empty_set_is_header_only() {
        assert_eq!(serialize_clean(&TrackSet::empty()), format!("{CLEAN_HEADER}\n"));
        assert!(parse_clean(&format!("{CLEAN_HEADER}\n")).unwrap().is_empty());
    }

    #[test]
    fn clean_requires_header() {
        assert!(parse_clean("1,3,120,210,20,10\n").is_err());
    }

    #[test]
    fn clean_file_naming() {
        assert_eq!(clean_file_name(Path::new("data/8_1.txt")), PathBuf::from("data/8_1_clean.txt"));
        assert_eq!(video_from_path(Path::new("x/8_1_clean.txt")), ("8".into(), View::Left));
        assert_eq!(video_from_path(Path::new("x/129_2_tr.csv")), ("129".into(), View::Right));
    }

    fn arb_record() -> impl Strategy<Value = TrackRecord> {
        (1u32..300, 0u32..20, -50.0f64..2000.0, -50.0f64..1200.0, 0.01f64..200.0, 0.01f64..200.0)
            .prop_map(|(f, id, cx, cy, xo, yo)| TrackRecord::new(f, id, cx, cy, xo, yo))
    }

    proptest! {
        #[test]
        fn clean_round_trip_is_identity(records in proptest::collection::vec(arb_record(), 0..60)) {
            let mut seen = std::collections::HashSet::new();
            let records: Vec<_> = records.into_iter().filter(|r| seen.insert((r.frame, r.id))).collect();
            let ts = TrackSet::new(records).unwrap();
            let text = serialize_clean(&ts);
            let back = parse_clean(&text).unwrap();
            prop_assert_eq!(back.records(), ts.records());
            prop_assert_eq!(serialize_clean(&back), text);
        }

        #[test]
        fn corner_conversion_is_inverse(r in arb_record()) {
            let [x0, y0, x1, y1] = r.corners();
            let back = TrackRecord::from_corners(r.frame, r.id, x0, y0, x1, y1);
            let tol = 1e-9 * (1.0 + r.cx.abs() + r.cy.abs() + r.x_off + r.y_off);
            prop_assert!((back.cx - r.cx).abs() <= tol);
            prop_assert!((back.cy - r.cy).abs() <= tol);
            prop_assert!((back.x_off - r.x_off).abs() <= tol);
            prop_assert!((back.y_off - r.y_off).abs() <= tol);
        }
    }
}
