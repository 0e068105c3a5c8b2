use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{
    acceleration_series, density_map, depth_series, heatmap_svg, line_plot_svg, path_lengths,
    spatial_distribution, speed_series, temporal_pattern, KinematicSeries, Trajectories,
};
use crate::error::{Error, Result};
use crate::mot_io::{write_text, TrackSet};
use crate::triangulate::Track3DSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub fps: f64,
    pub density_bins: (usize, usize),
    pub moving_average_window: usize,
    pub svg: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { fps: 240.0, density_bins: (20, 20), moving_average_window: 24, svg: true }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Config(format!("fps must be positive, got {}", self.fps)));
        }
        if self.density_bins.0 == 0 || self.density_bins.1 == 0 || self.moving_average_window == 0 {
            return Err(Error::Config("density bins and moving-average window must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    /// `3d` when triangulated tracks were analyzed, otherwise `2d` (pixels).
    pub source: String,
    pub ids: usize,
    pub records: usize,
    pub path_lengths: BTreeMap<u32, f64>,
    pub files: Vec<String>,
}

/// `id,frame,<quantity>` rows.
pub fn series_csv(series: &[KinematicSeries]) -> String {
    let name = series.first().map_or("value", |s| s.quantity.name());
    let mut out = format!("id,frame,{name}\n");
    for s in series {
        for (f, v) in &s.samples {
            let _ = writeln!(out, "{},{},{}", s.id, f, v);
        }
    }
    out
}

/// Frame -> boxes drawn on that frame, as `{"id", "box": [xmin, ymin, xmax, ymax]}`.
pub fn overlay_json(tracks: &TrackSet) -> Value {
    let mut map = Map::new();
    for (frame, recs) in tracks.by_frame() {
        let boxes: Vec<Value> = recs.iter().map(|r| json!({"id": r.id, "box": r.corners()})).collect();
        map.insert(frame.to_string(), Value::Array(boxes));
    }
    Value::Object(map)
}

fn plot_points(series: &[KinematicSeries]) -> Vec<(String, Vec<(f64, f64)>)> {
    series
        .iter()
        .map(|s| (format!("id {}", s.id), s.samples.iter().map(|(f, v)| (*f as f64, *v)).collect()))
        .collect()
}

/// Writes every analysis artifact into `out_dir` and returns a summary.
///
/// Motion quantities come from the 3D tracks when given, otherwise from the
/// left 2D tracks in pixels. Overlay files are written for every 2D set.
pub fn analyze(
    views: &[(&str, &TrackSet)],
    tracks3d: Option<&Track3DSet>,
    cfg: &AnalysisConfig,
    out_dir: &Path,
) -> Result<AnalysisSummary> {
    cfg.validate()?;
    let mut files = Vec::new();
    let mut write = |name: &str, text: &str| -> Result<()> {
        write_text(&out_dir.join(name), text)?;
        files.push(name.to_string());
        Ok(())
    };
    for (label, set) in views {
        write(&format!("overlay_{label}.json"), &(serde_json::to_string(&overlay_json(set))? + "\n"))?;
    }
    let (traj, source) = match (tracks3d, views.first()) {
        (Some(t), _) => (Trajectories::from(t), "3d"),
        (None, Some((_, set))) => (Trajectories::from(*set), "2d"),
        (None, None) => (Trajectories::default(), "2d"),
    };

    let speed = speed_series(&traj, cfg.fps);
    let accel: Vec<KinematicSeries> = speed.iter().map(|s| acceleration_series(s, cfg.fps)).collect();
    write("speed.csv", &series_csv(&speed))?;
    write("acceleration.csv", &series_csv(&accel))?;
    let lengths = path_lengths(&traj);
    let mut text = String::from("id,path_length\n");
    for (id, l) in &lengths {
        let _ = writeln!(text, "{id},{l}");
    }
    write("path_length.csv", &text)?;

    let mut text = String::from("id,count,cx,cy,cz,min_x,min_y,min_z,max_x,max_y,max_z\n");
    for s in spatial_distribution(&traj) {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.id, s.count, s.centroid[0], s.centroid[1], s.centroid[2], s.min[0], s.min[1], s.min[2], s.max[0], s.max[1], s.max[2]
        );
    }
    write("spatial.csv", &text)?;

    // Top-down view for 3D (x, z), image plane for 2D (x, y).
    let axes = if source == "3d" { (0, 2) } else { (0, 1) };
    let density = density_map(&traj, cfg.density_bins, axes);
    let mut text = String::from("row,col,x_lo,x_hi,y_lo,y_hi,count\n");
    if let Some(g) = &density {
        for (r, row) in g.counts.iter().enumerate() {
            for (c, n) in row.iter().enumerate() {
                let _ = writeln!(text, "{r},{c},{},{},{},{},{n}", g.x_edges[c], g.x_edges[c + 1], g.y_edges[r], g.y_edges[r + 1]);
            }
        }
    }
    write("density.csv", &text)?;

    let pattern = temporal_pattern(&traj, cfg.moving_average_window);
    let mut text = String::from("frame,visible,moving_average\n");
    for ((f, c), m) in pattern.frames.iter().zip(&pattern.counts).zip(&pattern.moving_average) {
        let _ = writeln!(text, "{f},{c},{m}");
    }
    write("temporal.csv", &text)?;

    let depth = tracks3d.map(depth_series);
    if let Some(d) = &depth {
        write("depth.csv", &series_csv(d))?;
    }

    if cfg.svg {
        write("speed.svg", &line_plot_svg("speed", &plot_points(&speed)))?;
        write("acceleration.svg", &line_plot_svg("acceleration", &plot_points(&accel)))?;
        if let Some(d) = &depth {
            write("depth.svg", &line_plot_svg("depth", &plot_points(d)))?;
        }
        if let Some(g) = &density {
            write("density.svg", &heatmap_svg("density", g))?;
        }
        let temporal = vec![
            ("visible".to_string(), pattern.frames.iter().zip(&pattern.counts).map(|(f, c)| (*f as f64, *c as f64)).collect()),
            ("moving average".to_string(), pattern.frames.iter().zip(&pattern.moving_average).map(|(f, m)| (*f as f64, *m)).collect()),
        ];
        write("temporal.svg", &line_plot_svg("visible fish", &temporal))?;
    }

    Ok(AnalysisSummary {
        source: source.into(),
        ids: traj.0.len(),
        records: traj.record_count(),
        path_lengths: lengths,
        files,
    })
}
