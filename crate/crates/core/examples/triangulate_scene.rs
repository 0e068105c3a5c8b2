//! Triangulates a matched scene and reports the error against truth.

use stereo_mot::stereo::{consensus, fundamental_from_rig, match_tracks, MatchConfig};
use stereo_mot::synth::{degrade, generate, SceneConfig};
use stereo_mot::triangulate::{serialize_tracks3d, triangulate_tracks};

fn main() -> stereo_mot::Result<()> {
    for noise in [0.0, 0.5, 1.0] {
        let truth = generate(&SceneConfig { seed: 2, noise_px: noise, ..Default::default() })?;
        let d = degrade(&truth)?;
        let rig = &truth.config.rig;
        let matches = consensus(&match_tracks(&d.left, &d.right, rig, &fundamental_from_rig(rig)?, &MatchConfig::default())?);
        let (set, stats) = triangulate_tracks(&d.left, &d.right, &matches, rig)?;
        let mut errs: Vec<f64> = set
            .records
            .iter()
            .map(|r| (truth.fish_by_left_id(r.left_id).unwrap().position(r.frame).unwrap() - r.position()).norm())
            .collect();
        errs.sort_by(f64::total_cmp);
        println!("noise {noise} px: {} points, median error {:.4}, {stats:?}", set.len(), errs[errs.len() / 2]);
        if noise == 0.0 {
            print!("{}", serialize_tracks3d(&set).lines().take(4).collect::<Vec<_>>().join("\n"));
            println!();
        }
    }
    Ok(())
}
