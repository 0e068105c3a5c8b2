//! Generates a degraded synthetic stereo scene and writes it to disk.
//!
//! `cargo run --example synth_scene -- [out_dir]`

use stereo_mot::synth::{degrade, generate, write_scene, BlipConfig, Dropout, Fragmentation, SceneConfig, Side, TrajectoryModel};

fn main() -> stereo_mot::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("synth_scene"), Into::into);
    let cfg = SceneConfig {
        seed: 7,
        model: TrajectoryModel::Helical,
        noise_px: 0.5,
        fragmentation: vec![Fragmentation { fish: 2, split_frame: 140, side: Side::Both }],
        dropouts: vec![Dropout { fish: 2, start: 120, end: 139, side: Side::Both }],
        blips: BlipConfig { count: 2, ..Default::default() },
        ..Default::default()
    };
    let truth = generate(&cfg)?;
    let degraded = degrade(&truth)?;
    let paths = write_scene(&out, &truth, &degraded)?;
    println!("fish: {}, frames: {}", truth.fish.len(), cfg.n_frames);
    println!("left ids after degradation: {:?}", degraded.left.ids());
    println!("fragments: {:?}", degraded.log.fragments);
    println!("written: {paths:#?}");
    Ok(())
}
