//! Re-identification of a fragmented synthetic view.

use stereo_mot::reid::{reidentify, ReidConfig};
use stereo_mot::synth::{degrade, generate, Dropout, Fragmentation, SceneConfig, Side};

fn main() -> stereo_mot::Result<()> {
    let cfg = SceneConfig {
        seed: 3,
        noise_px: 0.5,
        fragmentation: vec![
            Fragmentation { fish: 0, split_frame: 90, side: Side::Left },
            Fragmentation { fish: 4, split_frame: 180, side: Side::Left },
        ],
        dropouts: vec![
            Dropout { fish: 0, start: 70, end: 89, side: Side::Left },
            Dropout { fish: 4, start: 170, end: 179, side: Side::Left },
        ],
        ..Default::default()
    };
    let d = degrade(&generate(&cfg)?)?;
    let (tracks, report) = reidentify(&d.left, &ReidConfig::default())?;
    println!("ids {} -> {}", report.ids_before, report.ids_after);
    for m in &report.merges {
        println!("merged {} into {} at frame {} ({:.1} px)", m.new_id, m.old_id, m.merge_frame, m.distance);
    }
    println!("final ids: {:?}", tracks.ids());
    Ok(())
}
