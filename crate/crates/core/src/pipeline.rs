//! End-to-end processing of stereo video pairs into a run directory.
//!
//! Each pair gets its own directory with one sub-directory per stage:
//! `01_import`, `02_reid`, `03_match`, `04_triangulate`, `05_analyze` and
//! `06_evaluate`. The run root holds `config.txt` and `manifest.json`
//! (inputs with SHA-256 digests, configuration, version, per-stage counts
//! and timestamps). A stage error leaves a `FAILED` marker next to the
//! partial outputs of that pair.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::kinematics::analyze;
use crate::metrics::{completeness_json, evaluate_video, margin_table, metric_table};
use crate::mot_io::{load_calibration, read_text, read_tracks, serialize_calibration, serialize_clean, write_text, StereoRig, TrackSet};
use crate::reid::reidentify;
use crate::stereo::{consensus, fundamental_from_rig, match_tracks, serialize_consensus, serialize_matches, ConsensusMatch};
use crate::triangulate::{serialize_tracks3d, triangulate_tracks, Track3DSet};

pub const STAGES: [&str; 6] = ["01_import", "02_reid", "03_match", "04_triangulate", "05_analyze", "06_evaluate"];
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILED_MARKER: &str = "FAILED";

/// Input files of one stereo pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairInputs {
    pub video_id: String,
    pub left: PathBuf,
    pub right: PathBuf,
    pub calibration: PathBuf,
    pub gt_left: Option<PathBuf>,
    pub gt_right: Option<PathBuf>,
}

impl PairInputs {
    fn files(&self) -> Vec<&Path> {
        let mut v = vec![self.left.as_path(), self.right.as_path(), self.calibration.as_path()];
        v.extend(self.gt_left.as_deref());
        v.extend(self.gt_right.as_deref());
        v
    }
}

fn existing(dir: &Path, names: &[String]) -> Option<PathBuf> {
    names.iter().map(|n| dir.join(n)).find(|p| p.is_file())
}

/// Finds `{video}_1_tr.*` / `{video}_2_tr.*` tracker outputs in `dir`.
///
/// Ground truth is `{video}_1.txt` / `{video}_2.txt` when present. The
/// calibration is `{video}_calibration.txt`, falling back to
/// `calibration.txt`.
pub fn discover_pairs(dir: &Path) -> Result<Vec<PairInputs>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut pairs = Vec::new();
    for name in &names {
        let Some((video, ext)) = name.split_once("_1_tr.") else { continue };
        let right = format!("{video}_2_tr.{ext}");
        if !names.contains(&right) {
            return Err(Error::invalid(format!("{name} has no right-view partner {right}")));
        }
        let calibration = existing(dir, &[format!("{video}_calibration.txt"), "calibration.txt".into()])
            .ok_or_else(|| Error::invalid(format!("no calibration for video {video} in {}", dir.display())))?;
        pairs.push(PairInputs {
            video_id: video.to_string(),
            left: dir.join(name),
            right: dir.join(&right),
            calibration,
            gt_left: existing(dir, &[format!("{video}_1.txt")]),
            gt_right: existing(dir, &[format!("{video}_2.txt")]),
        });
    }
    if pairs.is_empty() {
        return Err(Error::invalid(format!("no *_1_tr.* / *_2_tr.* pairs in {}", dir.display())));
    }
    Ok(pairs)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: String,
    pub counts: Value,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub video_id: String,
    pub status: String,
    pub stages: Vec<StageRecord>,
    pub error: Option<String>,
    #[serde(skip)]
    pub exit_code: i32,
}

struct Runner<'a> {
    pair_dir: &'a Path,
    stages: Vec<StageRecord>,
}

impl Runner<'_> {
    fn stage<T>(&mut self, name: &str, body: impl FnOnce(&Path) -> Result<(T, Value)>) -> Result<T> {
        let started = now_ms();
        let dir = self.pair_dir.join(name);
        let result = std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e)).and_then(|_| body(&dir));
        let (status, counts) = match &result {
            Ok((_, c)) => ("ok", c.clone()),
            Err(_) => ("failed", Value::Null),
        };
        self.stages.push(StageRecord {
            name: name.into(),
            status: status.into(),
            counts,
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
        });
        result.map(|(v, _)| v).map_err(|e| {
            let _ = write_text(&self.pair_dir.join(FAILED_MARKER), &format!("{name}: {e}\n"));
            e
        })
    }
}

fn json_text(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Row label for a tracker file: its stem without a trailing `_tr`.
fn view_label(p: &Path) -> String {
    let stem = p.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    stem.strip_suffix("_tr").map(str::to_string).unwrap_or(stem)
}

struct Imported {
    left: TrackSet,
    right: TrackSet,
    rig: StereoRig,
    gt: Option<(TrackSet, TrackSet)>,
}

/// Runs all six stages for one pair inside `pair_dir`.
pub fn run_pair(inputs: &PairInputs, cfg: &Config, pair_dir: &Path) -> PairOutcome {
    let mut runner = Runner { pair_dir, stages: Vec::new() };
    let result = run_stages(inputs, cfg, &mut runner);
    let (status, error, exit_code) = match result {
        Ok(()) => ("ok", None, 0),
        Err(e) => ("failed", Some(e.to_string()), e.exit_code()),
    };
    PairOutcome {
        video_id: inputs.video_id.clone(),
        status: status.into(),
        stages: runner.stages,
        error,
        exit_code,
    }
}

fn run_stages(p: &PairInputs, cfg: &Config, runner: &mut Runner) -> Result<()> {
    let vid = p.video_id.as_str();
    let data = runner.stage(STAGES[0], |dir| {
        let left = read_tracks(&p.left)?;
        let right = read_tracks(&p.right)?;
        let rig = load_calibration(&read_text(&p.calibration)?)?;
        write_text(&dir.join(format!("{vid}_1_clean.txt")), &serialize_clean(&left))?;
        write_text(&dir.join(format!("{vid}_2_clean.txt")), &serialize_clean(&right))?;
        write_text(&dir.join("calibration.txt"), &serialize_calibration(&rig))?;
        let gt = match (&p.gt_left, &p.gt_right) {
            (Some(a), Some(b)) => {
                let (a, b) = (read_tracks(a)?, read_tracks(b)?);
                write_text(&dir.join(format!("{vid}_1_gt_clean.txt")), &serialize_clean(&a))?;
                write_text(&dir.join(format!("{vid}_2_gt_clean.txt")), &serialize_clean(&b))?;
                Some((a, b))
            }
            _ => None,
        };
        let counts = json!({
            "left_records": left.len(), "left_ids": left.ids().len(),
            "right_records": right.len(), "right_ids": right.ids().len(),
            "ground_truth": gt.is_some(),
        });
        Ok((Imported { left, right, rig, gt }, counts))
    })?;

    let (left, right) = runner.stage(STAGES[1], |dir| {
        let (l, lrep) = reidentify(&data.left, &cfg.reid)?;
        let (r, rrep) = reidentify(&data.right, &cfg.reid)?;
        write_text(&dir.join(format!("{vid}_1_reid.txt")), &serialize_clean(&l))?;
        write_text(&dir.join(format!("{vid}_2_reid.txt")), &serialize_clean(&r))?;
        write_text(&dir.join("reid_report.json"), &json_text(&json!({"left": lrep, "right": rrep}))?)?;
        let counts = json!({
            "left_ids_before": lrep.ids_before, "left_ids_after": lrep.ids_after, "left_merges": lrep.merges.len(),
            "right_ids_before": rrep.ids_before, "right_ids_after": rrep.ids_after, "right_merges": rrep.merges.len(),
        });
        Ok(((l, r), counts))
    })?;

    let matches: Vec<ConsensusMatch> = runner.stage(STAGES[2], |dir| {
        let f = fundamental_from_rig(&data.rig)?;
        let per_frame = match_tracks(&left, &right, &data.rig, &f, &cfg.matching)?;
        let pairs = consensus(&per_frame);
        write_text(&dir.join("frame_matches.csv"), &serialize_matches(&per_frame))?;
        write_text(&dir.join("consensus.csv"), &serialize_consensus(&pairs))?;
        Ok((pairs.clone(), json!({"frame_matches": per_frame.len(), "pairs": pairs.len()})))
    })?;

    let tracks3d: Track3DSet = runner.stage(STAGES[3], |dir| {
        let (mut set, stats) = triangulate_tracks(&left, &right, &matches, &data.rig)?;
        set.video_id = vid.to_string();
        set.fps = cfg.analysis.fps;
        write_text(&dir.join(format!("{vid}_3d.csv")), &serialize_tracks3d(&set))?;
        write_text(&dir.join("stats.json"), &json_text(&stats)?)?;
        Ok((set, json!(stats)))
    })?;

    runner.stage(STAGES[4], |dir| {
        let summary = analyze(&[("1", &left), ("2", &right)], Some(&tracks3d), &cfg.analysis, dir)?;
        write_text(&dir.join("summary.json"), &json_text(&summary)?)?;
        Ok(((), json!({"ids": summary.ids, "records": summary.records, "files": summary.files.len()})))
    })?;

    runner.stage(STAGES[5], |dir| {
        let Some((gt_l, gt_r)) = &data.gt else {
            write_text(&dir.join("evaluation.json"), &json_text(&json!({"skipped": "no ground truth"}))?)?;
            return Ok(((), json!({"evaluated": 0})));
        };
        let views = [
            (view_label(&p.left), gt_l, &data.left, &left),
            (view_label(&p.right), gt_r, &data.right, &right),
        ];
        let mut reports = Vec::new();
        let mut margins = Vec::new();
        let mut complete = Vec::new();
        let mut details = serde_json::Map::new();
        let mut id_counts = String::from("ID,GT IDs,Before Re-ID,After Re-ID\n");
        for (id, gt, before, after) in views {
            let e = evaluate_video(&id, gt, after, &cfg.eval)?;
            let _ = writeln!(id_counts, "{id},{},{},{}", gt.ids().len(), before.ids().len(), after.ids().len());
            reports.push(e.metrics.clone());
            margins.push((id.clone(), e.margin));
            complete.push((id.clone(), e.completeness.clone()));
            details.insert(id, serde_json::to_value(&e)?);
        }
        let (counts_doc, frames_doc) = completeness_json(&complete);
        write_text(&dir.join("metrics.csv"), &metric_table(&reports))?;
        write_text(&dir.join("margins.csv"), &margin_table(&margins))?;
        write_text(&dir.join("id_counts.csv"), &id_counts)?;
        write_text(&dir.join("completeness_counts.json"), &json_text(&counts_doc)?)?;
        write_text(&dir.join("completeness_frames.json"), &json_text(&frames_doc)?)?;
        write_text(&dir.join("evaluation.json"), &json_text(&Value::Object(details))?)?;
        let mota: Vec<f64> = reports.iter().map(|r| r.mota).collect();
        Ok(((), json!({"evaluated": reports.len(), "mota": mota})))
    })?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub pairs: Vec<PairOutcome>,
    /// 0 when every pair succeeded, otherwise the first failing pair's code.
    pub exit_code: i32,
}

/// Processes `pairs` concurrently (at most `workers` at a time) into
/// `out_dir/<video>/` and writes the manifest.
pub fn run_pipeline(pairs: &[PairInputs], cfg: &Config, out_dir: &Path, workers: usize) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = now_ms();
    let mut inputs = Vec::new();
    for p in pairs {
        let mut files = Vec::new();
        for f in p.files() {
            files.push(json!({"path": f, "sha256": sha256_file(f)?}));
        }
        inputs.push(json!({"video_id": p.video_id, "pair": p, "files": files}));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_text(&out_dir.join("config.txt"), &cfg.to_text())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<PairOutcome> =
        pool.install(|| pairs.par_iter().map(|p| run_pair(p, cfg, &out_dir.join(&p.video_id))).collect());

    let exit_code = outcomes.iter().map(|o| o.exit_code).find(|c| *c != 0).unwrap_or(0);
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "status": if exit_code == 0 { "ok" } else { "failed" },
        "workers": workers.max(1),
        "config": cfg.to_text(),
        "stages": STAGES,
        "inputs": inputs,
        "pairs": outcomes,
        "started_unix_ms": started,
        "finished_unix_ms": now_ms(),
    });
    write_text(&out_dir.join(MANIFEST_FILE), &json_text(&manifest)?)?;
    Ok(RunOutcome { out_dir: out_dir.to_path_buf(), pairs: outcomes, exit_code })
}
