//! Scores a degraded view against its ground truth.

use stereo_mot::metrics::{completeness_json, evaluate_video, margin_table, metric_table, EvalConfig};
use stereo_mot::reid::{reidentify, ReidConfig};
use stereo_mot::synth::{degrade, generate, BlipConfig, Dropout, SceneConfig, Side};

fn main() -> stereo_mot::Result<()> {
    let cfg = SceneConfig {
        seed: 9,
        noise_px: 1.0,
        dropouts: vec![Dropout { fish: 1, start: 100, end: 130, side: Side::Left }],
        blips: BlipConfig { count: 3, ..Default::default() },
        ..Default::default()
    };
    let truth = generate(&cfg)?;
    let d = degrade(&truth)?;
    let (after, _) = reidentify(&d.left, &ReidConfig::default())?;
    let eval_cfg = EvalConfig::default();
    let before = evaluate_video("before", &truth.left, &d.left, &eval_cfg)?;
    let after = evaluate_video("after", &truth.left, &after, &eval_cfg)?;
    print!("{}", metric_table(&[before.metrics.clone(), after.metrics.clone()]));
    print!("{}", margin_table(&[("after".to_string(), after.margin)]));
    let (counts, _frames) = completeness_json(&[("after".to_string(), after.completeness)]);
    println!("{counts}");
    Ok(())
}
