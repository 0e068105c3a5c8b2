//! Run configuration: one flat `key = value` file for every threshold.
//!
//! Blank lines and `#` comments are ignored. Unknown keys and malformed
//! values are errors. [`Config::to_text`] writes every key, so a saved file
//! reproduces a run exactly.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `reid.window` | 100 | frames searched around a track end |
//! | `reid.radius` | 50 | max pixel jump between fragments |
//! | `reid.overlap_limit` | 10 | max co-existing frames of two fragments |
//! | `reid.min_track_len` | 30 | shorter tracks are pruned |
//! | `reid.id_base` | 0 | first id after renumbering |
//! | `stereo.threshold` | 10 | max pixel distance to the epipolar line |
//! | `stereo.mode` | greedy | `greedy`, `optimal` or `unconstrained` |
//! | `kinematics.fps` | 240 | frame rate |
//! | `kinematics.density_bins_x` / `_y` | 20 | density histogram bins |
//! | `kinematics.moving_average_window` | 24 | frames in the visible-count average |
//! | `kinematics.svg` | true | write SVG plots |
//! | `metrics.geometry` | center | `center` or `iou` |
//! | `metrics.radius_factor` | 0.5 | center radius over average gt box size |
//! | `metrics.min_iou` | 0.5 | IoU threshold in `iou` mode |
//! | `metrics.margin_inner` / `_outer` | 0.5 / 2 | margin tiers over average box size |
//! | `metrics.alphas` | 0.05 ... 0.95 | comma-separated HOTA thresholds |
//! | `yolo.normalize` | true | normalized YOLO coordinates |
//! | `image.width` / `image.height` | 1920 / 1080 | frame size in pixels |

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::AnalysisConfig;
use crate::metrics::{EvalConfig, MatchGeometry};
use crate::mot_io::{read_text, ImageSize};
use crate::reid::ReidConfig;
use crate::stereo::{MatchConfig, MatchMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub reid: ReidConfig,
    pub matching: MatchConfig,
    pub analysis: AnalysisConfig,
    pub eval: EvalConfig,
    /// Kept so that switching geometry does not lose the other setting.
    pub min_iou: f64,
    pub radius_factor: f64,
    pub yolo_normalize: bool,
    pub image_size: ImageSize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            reid: ReidConfig::default(),
            matching: MatchConfig::default(),
            analysis: AnalysisConfig::default(),
            eval: EvalConfig::default(),
            min_iou: 0.5,
            radius_factor: 0.5,
            yolo_normalize: true,
            image_size: ImageSize::default(),
        }
    }
}

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {raw:?}")))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut seen = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, raw) = (key.trim(), raw.trim());
            if seen.insert(key.to_string(), i + 1).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key}", i + 1)));
            }
            cfg.set(key, raw).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "reid.window" => self.reid.window = value(key, raw)?,
            "reid.radius" => self.reid.radius = value(key, raw)?,
            "reid.overlap_limit" => self.reid.overlap_limit = value(key, raw)?,
            "reid.min_track_len" => self.reid.min_track_len = value(key, raw)?,
            "reid.id_base" => self.reid.id_base = value(key, raw)?,
            "stereo.threshold" => self.matching.threshold = value(key, raw)?,
            "stereo.mode" => self.matching.mode = raw.parse::<MatchMode>()?,
            "kinematics.fps" => self.analysis.fps = value(key, raw)?,
            "kinematics.density_bins_x" => self.analysis.density_bins.0 = value(key, raw)?,
            "kinematics.density_bins_y" => self.analysis.density_bins.1 = value(key, raw)?,
            "kinematics.moving_average_window" => self.analysis.moving_average_window = value(key, raw)?,
            "kinematics.svg" => self.analysis.svg = value(key, raw)?,
            "metrics.geometry" => {
                self.eval.geometry = match raw {
                    "center" => MatchGeometry::Center { radius_factor: self.radius_factor },
                    "iou" => MatchGeometry::Iou { min_iou: self.min_iou },
                    _ => return Err(Error::Config(format!("{key}: expected center or iou, got {raw:?}"))),
                }
            }
            "metrics.radius_factor" => {
                self.radius_factor = value(key, raw)?;
                if let MatchGeometry::Center { radius_factor } = &mut self.eval.geometry {
                    *radius_factor = self.radius_factor;
                }
            }
            "metrics.min_iou" => {
                self.min_iou = value(key, raw)?;
                if let MatchGeometry::Iou { min_iou } = &mut self.eval.geometry {
                    *min_iou = self.min_iou;
                }
            }
            "metrics.margin_inner" => self.eval.margin.inner = value(key, raw)?,
            "metrics.margin_outer" => self.eval.margin.outer = value(key, raw)?,
            "metrics.alphas" => {
                self.eval.alphas = raw.split(',').map(|a| value(key, a.trim())).collect::<Result<_>>()?
            }
            "yolo.normalize" => self.yolo_normalize = value(key, raw)?,
            "image.width" => self.image_size.width = value(key, raw)?,
            "image.height" => self.image_size.height = value(key, raw)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.reid.validate()?;
        if !(self.matching.threshold > 0.0 && self.matching.threshold.is_finite()) {
            return Err(Error::Config("stereo.threshold must be positive".into()));
        }
        self.analysis.validate()?;
        self.eval.validate()?;
        if self.image_size.width == 0 || self.image_size.height == 0 {
            return Err(Error::Config("image size must be positive".into()));
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn to_text(&self) -> String {
        let geometry = match self.eval.geometry {
            MatchGeometry::Center { .. } => "center",
            MatchGeometry::Iou { .. } => "iou",
        };
        let alphas: Vec<String> = self.eval.alphas.iter().map(f64::to_string).collect();
        let rows: Vec<(&str, String)> = vec![
            ("reid.window", self.reid.window.to_string()),
            ("reid.radius", self.reid.radius.to_string()),
            ("reid.overlap_limit", self.reid.overlap_limit.to_string()),
            ("reid.min_track_len", self.reid.min_track_len.to_string()),
            ("reid.id_base", self.reid.id_base.to_string()),
            ("stereo.threshold", self.matching.threshold.to_string()),
            ("stereo.mode", self.matching.mode.to_string()),
            ("kinematics.fps", self.analysis.fps.to_string()),
            ("kinematics.density_bins_x", self.analysis.density_bins.0.to_string()),
            ("kinematics.density_bins_y", self.analysis.density_bins.1.to_string()),
            ("kinematics.moving_average_window", self.analysis.moving_average_window.to_string()),
            ("kinematics.svg", self.analysis.svg.to_string()),
            ("metrics.radius_factor", self.radius_factor.to_string()),
            ("metrics.min_iou", self.min_iou.to_string()),
            ("metrics.geometry", geometry.to_string()),
            ("metrics.margin_inner", self.eval.margin.inner.to_string()),
            ("metrics.margin_outer", self.eval.margin.outer.to_string()),
            ("metrics.alphas", alphas.join(",")),
            ("yolo.normalize", self.yolo_normalize.to_string()),
            ("image.width", self.image_size.width.to_string()),
            ("image.height", self.image_size.height.to_string()),
        ];
        rows.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let d = Config::default();
        assert_eq!(Config::parse(&d.to_text()).unwrap(), d);
        assert_eq!(Config::parse("").unwrap(), d);
    }

    #[test]
    fn overrides_and_comments() {
        let c = Config::parse("# tuned\nreid.window = 80\nstereo.mode = optimal  # try\nmetrics.geometry = iou\nmetrics.min_iou=0.3\n").unwrap();
        assert_eq!(c.reid.window, 80);
        assert_eq!(c.matching.mode, MatchMode::Optimal);
        assert_eq!(c.eval.geometry, MatchGeometry::Iou { min_iou: 0.3 });
        assert_eq!(Config::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "reid.windw = 3",
            "reid.window",
            "reid.window = x",
            "reid.window = 5\nreid.window = 6",
            "stereo.threshold = -1",
            "metrics.alphas = 0.5, 1.5",
            "stereo.mode = best",
        ] {
            assert!(matches!(Config::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
