//! Writes two synthetic pairs and runs the whole pipeline over them.

use stereo_mot::config::Config;
use stereo_mot::pipeline::{discover_pairs, run_pipeline};
use stereo_mot::synth::{degrade, generate, write_scene, SceneConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join("full_pipeline");
    let inputs = root.join("inputs");
    for (seed, vid) in [(1u64, "901"), (2, "902")] {
        let truth = generate(&SceneConfig { seed, video_id: vid.into(), noise_px: 0.5, ..Default::default() })?;
        write_scene(&inputs, &truth, &degrade(&truth)?)?;
        std::fs::rename(inputs.join("calibration.txt"), inputs.join(format!("{vid}_calibration.txt")))?;
    }
    let pairs = discover_pairs(&inputs)?;
    let outcome = run_pipeline(&pairs, &Config::default(), &root.join("run"), 2)?;
    for p in &outcome.pairs {
        println!("{}: {}", p.video_id, p.status);
    }
    println!("exit code {}", outcome.exit_code);
    print!("{}", std::fs::read_to_string(root.join("run/901/06_evaluate/metrics.csv")).unwrap_or_default());
    Ok(())
}
