use std::collections::BTreeMap;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::geometry::{epipolar_line, point_line_distance, undistort_point, FundamentalMatrix};
use crate::assignment;
use crate::error::{Error, Result};
use crate::mot_io::{parse_index, split_fields, StereoRig, TrackSet};

/// How per-frame candidate pairs are turned into matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// Accept pairs by ascending residual, skipping ids already used.
    #[default]
    Greedy,
    /// Maximum number of one-to-one pairs, then minimum total residual.
    Optimal,
    /// Each left id takes its closest right id; right ids may repeat.
    Unconstrained,
}

impl std::str::FromStr for MatchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Self::Greedy),
            "optimal" => Ok(Self::Optimal),
            "unconstrained" => Ok(Self::Unconstrained),
            other => Err(Error::Config(format!("unknown match mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for MatchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Greedy => "greedy",
            Self::Optimal => "optimal",
            Self::Unconstrained => "unconstrained",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Maximum point-to-epipolar-line distance in pixels.
    pub threshold: f64,
    pub mode: MatchMode,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            threshold: 10.0,
            mode: MatchMode::Greedy,
        }
    }
}

/// A detection center in one view, already undistorted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub id: u32,
    pub point: Point2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMatch {
    pub frame: u32,
    pub left_id: u32,
    pub right_id: u32,
    /// Right point's distance to the left point's epipolar line, pixels.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusMatch {
    pub left_id: u32,
    pub right_id: u32,
    /// Frames voting for this pair.
    pub support: u32,
    /// Frames in which the left id was matched at all.
    pub total: u32,
}

/// Matches the detections of one frame.
///
/// Input order does not matter: detections are sorted by id and equal
/// residuals are broken by `(left_id, right_id)`.
pub fn match_frame(
    frame: u32,
    left: &[Detection],
    right: &[Detection],
    f: &FundamentalMatrix,
    cfg: &MatchConfig,
) -> Vec<FrameMatch> {
    let mut left: Vec<Detection> = left.to_vec();
    let mut right: Vec<Detection> = right.to_vec();
    left.sort_by_key(|d| d.id);
    right.sort_by_key(|d| d.id);

    // residual[i][j], None when above threshold or the line is degenerate
    let residuals: Vec<Vec<Option<f64>>> = left
        .iter()
        .map(|l| match epipolar_line(f, &l.point) {
            Ok(line) => right
                .iter()
                .map(|r| {
                    let d = point_line_distance(&line, &r.point);
                    (d <= cfg.threshold).then_some(d)
                })
                .collect(),
            Err(_) => {
                log::debug!("frame {frame}: left id {} sits on the epipole", l.id);
                vec![None; right.len()]
            }
        })
        .collect();

    let make = |i: usize, j: usize| FrameMatch {
        frame,
        left_id: left[i].id,
        right_id: right[j].id,
        residual: residuals[i][j].expect("allowed pair"),
    };

    let mut out: Vec<FrameMatch> = match cfg.mode {
        MatchMode::Unconstrained => (0..left.len())
            .filter_map(|i| {
                (0..right.len())
                    .filter_map(|j| residuals[i][j].map(|d| (d, j)))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                    .map(|(_, j)| make(i, j))
            })
            .collect(),
        MatchMode::Greedy => {
            let mut pairs: Vec<(f64, usize, usize)> = residuals
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().filter_map(move |(j, d)| d.map(|d| (d, i, j))))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut used_l = vec![false; left.len()];
            let mut used_r = vec![false; right.len()];
            let mut out = Vec::new();
            for (_, i, j) in pairs {
                if !used_l[i] && !used_r[j] {
                    used_l[i] = true;
                    used_r[j] = true;
                    out.push(make(i, j));
                }
            }
            out
        }
        MatchMode::Optimal => assignment::max_cardinality_min_cost(&residuals)
            .into_iter()
            .map(|(i, j)| make(i, j))
            .collect(),
    };
    out.sort_by_key(|m| m.left_id);
    out
}

/// Undistorts both views and matches every frame present in both.
pub fn match_tracks(
    left: &TrackSet,
    right: &TrackSet,
    rig: &StereoRig,
    f: &FundamentalMatrix,
    cfg: &MatchConfig,
) -> Result<Vec<FrameMatch>> {
    let undistorted = |ts: &TrackSet, left_view: bool| -> Result<BTreeMap<u32, Vec<Detection>>> {
        let (k, d) = if left_view { (&rig.k1, &rig.dist1) } else { (&rig.k2, &rig.dist2) };
        let mut out: BTreeMap<u32, Vec<Detection>> = BTreeMap::new();
        for r in ts.records() {
            let point = undistort_point(&r.center(), k, d)?;
            out.entry(r.frame).or_default().push(Detection { id: r.id, point });
        }
        Ok(out)
    };
    let l = undistorted(left, true)?;
    let r = undistorted(right, false)?;
    let mut out = Vec::new();
    for (frame, dets) in &l {
        if let Some(rdets) = r.get(frame) {
            out.extend(match_frame(*frame, dets, rdets, f, cfg));
        }
    }
    Ok(out)
}

/// Modal right id per left id; ties go to the smaller right id.
pub fn consensus(per_frame: &[FrameMatch]) -> Vec<ConsensusMatch> {
    let mut votes: BTreeMap<u32, BTreeMap<u32, u32>> = BTreeMap::new();
    for m in per_frame {
        *votes.entry(m.left_id).or_default().entry(m.right_id).or_default() += 1;
    }
    votes
        .into_iter()
        .map(|(left_id, counts)| {
            let total = counts.values().sum();
            // BTreeMap iterates right ids ascending; keep the first maximum.
            let (right_id, support) = counts
                .into_iter()
                .fold((0, 0), |best, (id, n)| if n > best.1 { (id, n) } else { best });
            ConsensusMatch {
                left_id,
                right_id,
                support,
                total,
            }
        })
        .collect()
}

pub fn serialize_matches(matches: &[FrameMatch]) -> String {
    let mut out = String::from("frame,left_id,right_id,residual\n");
    for m in matches {
        out.push_str(&format!("{},{},{},{:.6}\n", m.frame, m.left_id, m.right_id, m.residual));
    }
    out
}

pub fn serialize_consensus(matches: &[ConsensusMatch]) -> String {
    let mut out = String::from("left_id,right_id,support,total\n");
    for m in matches {
        out.push_str(&format!("{},{},{},{}\n", m.left_id, m.right_id, m.support, m.total));
    }
    out
}

/// Reads a consensus table or a hand-made `left_id,right_id` table.
/// Missing support/total columns read as zero.
pub fn parse_match_table(text: &str) -> Result<Vec<ConsensusMatch>> {
    let mut out = Vec::new();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    if let Some((_, first)) = lines.peek() {
        if first.trim_start().starts_with("left_id") {
            lines.next();
        }
    }
    for (idx, line) in lines {
        let n = idx + 1;
        let fields: Vec<&str> = split_fields(line).collect();
        if fields.len() < 2 {
            return Err(Error::parse(n, "expected at least left_id,right_id"));
        }
        let count = |i: usize| -> Result<u32> {
            fields.get(i).map_or(Ok(0), |t| parse_index(t, n, "count"))
        };
        out.push(ConsensusMatch {
            left_id: parse_index(fields[0], n, "left_id")?,
            right_id: parse_index(fields[1], n, "right_id")?,
            support: count(2)?,
            total: count(3)?,
        });
    }
    out.sort_by_key(|m| m.left_id);
    if let Some(w) = out.windows(2).find(|w| w[0].left_id == w[1].left_id) {
        return Err(Error::invalid(format!("left id {} listed twice", w[0].left_id)));
    }
    Ok(out)
}
