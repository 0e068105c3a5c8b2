//! Command line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::kinematics::analyze;
use crate::metrics::{completeness_json, evaluate_video, margin_table, metric_table};
use crate::mot_io::{
    clean_file_name, export_yolo_labels, load_calibration, read_text, read_tracks, serialize_clean, write_text,
};
use crate::pipeline::{discover_pairs, run_pipeline, PairInputs};
use crate::reid::reidentify;
use crate::stereo::{
    consensus, fundamental_from_rig, match_tracks, parse_match_table, serialize_consensus, serialize_matches,
    MatchMode,
};
use crate::synth::{
    degrade, generate, write_scene, BlipConfig, Dropout, Fragmentation, SceneConfig, Side, TrajectoryModel,
};
use crate::triangulate::{parse_tracks3d, serialize_tracks3d, triangulate_tracks};

#[derive(Debug, Parser)]
#[command(name = "stereo-mot", version, about = "Stereo fish tracking post-processing and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Flat key = value file overriding the defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<Config> {
        match &self.config {
            Some(p) => Config::load(p),
            None => Ok(Config::default()),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a raw MOT file into the center/offset clean format.
    Clean {
        input: PathBuf,
        /// Defaults to `<input stem>_clean.txt` next to the input.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write YOLO label files (one per frame) and data.yaml.
    ExportYolo {
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Keep pixel coordinates instead of normalizing by the image size.
        #[arg(long)]
        no_normalize: bool,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Convert tracker output (corner boxes) into a clean file.
    ImportTracks {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Merge fragmented ids, prune short tracks and renumber.
    Reid {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        /// JSON report of merges, pruned ids and the renumbering.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Pair left and right ids through epipolar geometry.
    Match {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        calibration: PathBuf,
        /// Consensus table (left_id,right_id,support,total).
        #[arg(long, short)]
        output: PathBuf,
        /// Optional per-frame match table.
        #[arg(long)]
        frame_matches: Option<PathBuf>,
        #[arg(long)]
        mode: Option<MatchMode>,
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Triangulate matched ids into 3D tracks.
    Triangulate {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        calibration: PathBuf,
        #[arg(long)]
        matches: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Score predictions against ground truth. Repeat --gt/--pred for
    /// several videos; they are paired in order.
    Evaluate {
        #[arg(long, required = true)]
        gt: Vec<PathBuf>,
        #[arg(long, required = true)]
        pred: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Kinematics, density and temporal analytics with plots.
    Analyze {
        /// 2D clean or tracker files (overlay and 2D fallback).
        #[arg(long = "tracks", required = true)]
        tracks: Vec<PathBuf>,
        /// Triangulated CSV; motion quantities use it when given.
        #[arg(long)]
        tracks3d: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Generate a synthetic stereo scene with ground truth.
    Synth(SynthArgs),
    /// Run import, re-id, match, triangulate, analyze and evaluate.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "900")]
    pub video_id: String,
    #[arg(long, default_value_t = 9)]
    pub fish: usize,
    #[arg(long, default_value_t = 260)]
    pub frames: u32,
    /// linear, helical or random-walk
    #[arg(long, default_value = "linear")]
    pub model: TrajectoryModel,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// FISH:FRAME, a fresh id from FRAME on in both views.
    #[arg(long = "fragment")]
    pub fragments: Vec<String>,
    /// FISH:START-END, missing detections in both views.
    #[arg(long = "dropout")]
    pub dropouts: Vec<String>,
    /// Short false-positive tracks per view.
    #[arg(long, default_value_t = 0)]
    pub blips: usize,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Directory searched for `<video>_1_tr.*` / `<video>_2_tr.*` pairs.
    #[arg(long, conflicts_with_all = ["left", "right"])]
    pub input: Option<PathBuf>,
    #[arg(long, requires_all = ["right", "calibration"])]
    pub left: Option<PathBuf>,
    #[arg(long)]
    pub right: Option<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long)]
    pub gt_left: Option<PathBuf>,
    #[arg(long)]
    pub gt_right: Option<PathBuf>,
    #[arg(long, default_value = "video")]
    pub video_id: String,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Pairs processed concurrently.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub config: ConfigArg,
}

fn parse_fragment(s: &str) -> Result<Fragmentation> {
    let bad = || Error::Config(format!("--fragment expects FISH:FRAME, got {s:?}"));
    let (fish, frame) = s.split_once(':').ok_or_else(bad)?;
    Ok(Fragmentation {
        fish: fish.parse().map_err(|_| bad())?,
        split_frame: frame.parse().map_err(|_| bad())?,
        side: Side::Both,
    })
}

fn parse_dropout(s: &str) -> Result<Dropout> {
    let bad = || Error::Config(format!("--dropout expects FISH:START-END, got {s:?}"));
    let (fish, range) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = range.split_once('-').ok_or_else(bad)?;
    Ok(Dropout {
        fish: fish.parse().map_err(|_| bad())?,
        start: a.parse().map_err(|_| bad())?,
        end: b.parse().map_err(|_| bad())?,
        side: Side::Both,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn json_text(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Executes a parsed command; returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Clean { input, output } => {
            let tracks = read_tracks(&input)?;
            let out = output.unwrap_or_else(|| clean_file_name(&input));
            write_text(&out, &serialize_clean(&tracks))?;
            println!("{} records -> {}", tracks.len(), out.display());
        }
        Command::ImportTracks { input, output } => {
            let tracks = read_tracks(&input)?;
            write_text(&output, &serialize_clean(&tracks))?;
            println!("{} records, {} ids -> {}", tracks.len(), tracks.ids().len(), output.display());
        }
        Command::ExportYolo { input, out_dir, no_normalize, config } => {
            let cfg = config.load()?;
            let tracks = read_tracks(&input)?.with_image_size(cfg.image_size);
            let export = export_yolo_labels(&tracks, &out_dir, cfg.yolo_normalize && !no_normalize)?;
            println!("{} label files, {} rows -> {}", export.files, export.rows, export.label_dir.display());
        }
        Command::Reid { input, output, report, config } => {
            let cfg = config.load()?;
            let tracks = read_tracks(&input)?;
            let (out, rep) = reidentify(&tracks, &cfg.reid)?;
            write_text(&output, &serialize_clean(&out))?;
            if let Some(r) = report {
                write_text(&r, &json_text(&rep)?)?;
            }
            println!("ids {} -> {} ({} merges)", rep.ids_before, rep.ids_after, rep.merges.len());
        }
        Command::Match { left, right, calibration, output, frame_matches, mode, threshold, config } => {
            let mut cfg = config.load()?;
            if let Some(m) = mode {
                cfg.matching.mode = m;
            }
            if let Some(t) = threshold {
                cfg.matching.threshold = t;
            }
            cfg.validate()?;
            let rig = load_calibration(&read_text(&calibration)?)?;
            let f = fundamental_from_rig(&rig)?;
            let per_frame = match_tracks(&read_tracks(&left)?, &read_tracks(&right)?, &rig, &f, &cfg.matching)?;
            let pairs = consensus(&per_frame);
            write_text(&output, &serialize_consensus(&pairs))?;
            if let Some(p) = frame_matches {
                write_text(&p, &serialize_matches(&per_frame))?;
            }
            println!("{} per-frame matches, {} consensus pairs", per_frame.len(), pairs.len());
        }
        Command::Triangulate { left, right, calibration, matches, output } => {
            let rig = load_calibration(&read_text(&calibration)?)?;
            let pairs = parse_match_table(&read_text(&matches)?)?;
            let l = read_tracks(&left)?;
            let (set, stats) = triangulate_tracks(&l, &read_tracks(&right)?, &pairs, &rig)?;
            write_text(&output, &serialize_tracks3d(&set))?;
            println!("{} of {} points triangulated", stats.triangulated, stats.attempted);
            if stats.attempted > 0 && stats.triangulated == 0 {
                return Err(Error::numerical("no point could be triangulated"));
            }
        }
        Command::Evaluate { gt, pred, out_dir, config } => {
            let cfg = config.load()?;
            if gt.len() != pred.len() {
                return Err(Error::Config(format!("{} --gt files but {} --pred files", gt.len(), pred.len())));
            }
            let mut reports = Vec::new();
            let mut margins = Vec::new();
            let mut complete = Vec::new();
            for (g, p) in gt.iter().zip(&pred) {
                let id = file_name(p);
                let e = evaluate_video(&id, &read_tracks(g)?, &read_tracks(p)?, &cfg.eval)?;
                reports.push(e.metrics);
                margins.push((id.clone(), e.margin));
                complete.push((id, e.completeness));
            }
            let table = metric_table(&reports);
            let (counts, frames) = completeness_json(&complete);
            write_text(&out_dir.join("metrics.csv"), &table)?;
            write_text(&out_dir.join("margins.csv"), &margin_table(&margins))?;
            write_text(&out_dir.join("completeness_counts.json"), &json_text(&counts)?)?;
            write_text(&out_dir.join("completeness_frames.json"), &json_text(&frames)?)?;
            print!("{table}");
        }
        Command::Analyze { tracks, tracks3d, out_dir, config } => {
            let cfg = config.load()?;
            let sets = tracks.iter().map(|p| read_tracks(p)).collect::<Result<Vec<_>>>()?;
            let labels: Vec<String> = sets.iter().map(|s| s.video_name()).collect();
            let views: Vec<(&str, &_)> = labels.iter().map(String::as_str).zip(&sets).collect();
            let t3d = match &tracks3d {
                Some(p) => {
                    let (vid, _) = crate::mot_io::View::split_video_name(&file_name(p).replace("_3d.csv", ""));
                    Some(parse_tracks3d(&read_text(p)?, &vid, cfg.analysis.fps)?)
                }
                None => None,
            };
            let summary = analyze(&views, t3d.as_ref(), &cfg.analysis, &out_dir)?;
            write_text(&out_dir.join("summary.json"), &json_text(&summary)?)?;
            println!("{} ids, {} files -> {}", summary.ids, summary.files.len(), out_dir.display());
        }
        Command::Synth(a) => {
            let cfg = SceneConfig {
                video_id: a.video_id,
                n_fish: a.fish,
                n_frames: a.frames,
                model: a.model,
                noise_px: a.noise,
                fragmentation: a.fragments.iter().map(|s| parse_fragment(s)).collect::<Result<_>>()?,
                dropouts: a.dropouts.iter().map(|s| parse_dropout(s)).collect::<Result<_>>()?,
                blips: BlipConfig { count: a.blips, ..Default::default() },
                seed: a.seed,
                ..Default::default()
            };
            let truth = generate(&cfg)?;
            let degraded = degrade(&truth)?;
            let paths = write_scene(&a.out_dir, &truth, &degraded)?;
            println!("scene {} -> {}", cfg.video_id, paths.truth.parent().unwrap_or(&a.out_dir).display());
        }
        Command::Pipeline(a) => {
            let cfg = a.config.load()?;
            let pairs = match (&a.input, &a.left) {
                (Some(dir), _) => discover_pairs(dir)?,
                (None, Some(left)) => vec![PairInputs {
                    video_id: a.video_id.clone(),
                    left: left.clone(),
                    right: a.right.clone().expect("clap enforces --right"),
                    calibration: a.calibration.clone().expect("clap enforces --calibration"),
                    gt_left: a.gt_left.clone(),
                    gt_right: a.gt_right.clone(),
                }],
                (None, None) => return Err(Error::Config("pipeline needs --input or --left/--right".into())),
            };
            let run = run_pipeline(&pairs, &cfg, &a.out_dir, a.workers)?;
            for p in &run.pairs {
                match &p.error {
                    None => println!("{}: ok", p.video_id),
                    Some(e) => eprintln!("{}: failed: {e}", p.video_id),
                }
            }
            return Ok(run.exit_code);
        }
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
