//! Speed, acceleration and path length of a helical scene, plus the full
//! analysis output directory.

use stereo_mot::kinematics::{acceleration_series, analyze, path_lengths, speed_series, AnalysisConfig, Trajectories};
use stereo_mot::stereo::{consensus, fundamental_from_rig, match_tracks, MatchConfig};
use stereo_mot::synth::{generate, SceneConfig, TrajectoryModel};
use stereo_mot::triangulate::triangulate_tracks;

fn main() -> stereo_mot::Result<()> {
    let truth = generate(&SceneConfig { seed: 4, model: TrajectoryModel::Helical, ..Default::default() })?;
    let rig = &truth.config.rig;
    let matches = consensus(&match_tracks(&truth.left, &truth.right, rig, &fundamental_from_rig(rig)?, &MatchConfig::default())?);
    let (set, _) = triangulate_tracks(&truth.left, &truth.right, &matches, rig)?;
    let traj = Trajectories::from(&set);
    let lengths = path_lengths(&traj);
    for s in speed_series(&traj, truth.config.fps) {
        let acc = acceleration_series(&s, truth.config.fps);
        let mean_acc = acc.samples.iter().map(|a| a.1).sum::<f64>() / acc.samples.len() as f64;
        let fish = truth.fish_by_left_id(s.id).unwrap();
        println!(
            "id {}: path {:.2} (exact {:.2}), mean acceleration {:.2} (exact {:.2})",
            s.id,
            lengths[&s.id],
            fish.trajectory.arc_length(0.0, truth.time(truth.config.n_frames)).unwrap(),
            mean_acc,
            fish.trajectory.speed_derivative().unwrap()
        );
    }
    let out = std::env::temp_dir().join("kinematics_report");
    let summary = analyze(&[("900_1", &truth.left)], Some(&set), &AnalysisConfig::default(), &out)?;
    println!("{summary:?}");
    Ok(())
}
