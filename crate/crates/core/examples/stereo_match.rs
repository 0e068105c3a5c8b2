//! Epipolar matching of left and right ids.

use stereo_mot::stereo::{consensus, fundamental_from_rig, match_tracks, serialize_consensus, MatchConfig};
use stereo_mot::synth::{degrade, generate, SceneConfig};

fn main() -> stereo_mot::Result<()> {
    let truth = generate(&SceneConfig { seed: 1, noise_px: 0.5, ..Default::default() })?;
    let d = degrade(&truth)?;
    let rig = &truth.config.rig;
    let f = fundamental_from_rig(rig)?;
    let per_frame = match_tracks(&d.left, &d.right, rig, &f, &MatchConfig::default())?;
    let table = consensus(&per_frame);
    print!("{}", serialize_consensus(&table));
    let correct = table.iter().filter(|m| truth.correspondence[&m.left_id] == m.right_id).count();
    println!("{correct}/{} pairs agree with the generator", table.len());
    Ok(())
}
