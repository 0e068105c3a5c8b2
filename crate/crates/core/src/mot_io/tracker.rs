use super::{parse_frame, parse_index, parse_number, split_fields, TrackRecord, TrackSet};
use crate::error::{Error, Result};

/// A tracker output row after corner-to-center conversion.
///
/// Confidence and class are carried along but nothing downstream uses them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerDetection {
    pub record: TrackRecord,
    pub confidence: Option<f64>,
    pub class: Option<f64>,
}

/// Parses tracker rows `frame, id, xmin, ymin, xmax, ymax[, conf[, class]]`.
/// A leading non-numeric header line is skipped.
pub fn parse_tracker_detections(text: &str) -> Result<Vec<TrackerDetection>> {
    let mut out = Vec::new();
    let mut first = true;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = split_fields(line).collect();
        if first {
            first = false;
            if fields.first().map(|t| t.parse::<f64>().is_err()).unwrap_or(false) {
                continue;
            }
        }
        if fields.len() < 6 {
            return Err(Error::parse(
                line_no,
                format!("expected at least 6 columns, found {}", fields.len()),
            ));
        }
        let frame = parse_frame(fields[0], line_no)?;
        let id = parse_index(fields[1], line_no, "track id")?;
        let xmin = parse_number(fields[2], line_no, "xmin")?;
        let ymin = parse_number(fields[3], line_no, "ymin")?;
        let xmax = parse_number(fields[4], line_no, "xmax")?;
        let ymax = parse_number(fields[5], line_no, "ymax")?;
        if xmax <= xmin || ymax <= ymin {
            return Err(Error::parse(
                line_no,
                format!("degenerate box [{xmin}, {ymin}, {xmax}, {ymax}]"),
            ));
        }
        let confidence = fields
            .get(6)
            .map(|t| parse_number(t, line_no, "confidence"))
            .transpose()?;
        let class = fields.get(7).map(|t| parse_number(t, line_no, "class")).transpose()?;
        out.push(TrackerDetection {
            record: TrackRecord::from_corners(frame, id, xmin, ymin, xmax, ymax),
            confidence,
            class,
        });
    }
    Ok(out)
}

/// Parses tracker output straight into a [`TrackSet`].
pub fn parse_tracker_output(text: &str) -> Result<TrackSet> {
    let dets = parse_tracker_detections(text)?;
    TrackSet::new(dets.into_iter().map(|d| d.record).collect())
}

/// Writes tracker-style rows with a header, confidence 1 and class 0.
pub fn serialize_tracker_output(tracks: &TrackSet) -> String {
    let mut out = String::from("frame,id,xmin,ymin,xmax,ymax,conf,class\n");
    for r in tracks.records() {
        let [x0, y0, x1, y1] = r.corners();
        out.push_str(&format!("{},{},{},{},{},{},1,0\n", r.frame, r.id, x0, y0, x1, y1));
    }
    out
}
