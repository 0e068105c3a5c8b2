mod common;

use common::*;
use proptest::prelude::*;
use stereo_mot::metrics::*;
use stereo_mot::{TrackRecord, TrackSet};

fn evaluate(gt: &TrackSet, pred: &TrackSet) -> (f64, IdMapping) {
    let radius = 0.5 * avg_size(gt);
    (radius, map_ids(gt, pred, MatchCriterion::Center { radius }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn clear_counts_match_exhaustive_matching(seed in any::<u64>(), ids in 1u32..=5, frames in 1u32..=20) {
        let (gt, pred) = toy_scene(seed, ids, frames);
        let (radius, mapping) = evaluate(&gt, &pred);
        let c = frame_confusion(&gt, &pred, &mapping);
        let oracle = brute_clear(&gt, &pred, radius, &mapping.gt_to_pred());
        prop_assert_eq!((c.tp, c.fp, c.fn_, c.idsw), (oracle.tp, oracle.fp, oracle.fn_, oracle.idsw));
        prop_assert_eq!(mota(&c).unwrap(), brute_mota(&oracle));
        for fc in &c.frames {
            prop_assert!(fc.tp <= fc.gt.min(fc.pred));
        }
    }

    #[test]
    fn idf1_matches_exhaustive_assignment(seed in any::<u64>(), ids in 1u32..=5, frames in 1u32..=20) {
        let (gt, pred) = toy_scene(seed, ids, frames);
        let (radius, mapping) = evaluate(&gt, &pred);
        let s = idf1(&gt, &pred, &mapping).unwrap();
        prop_assert_eq!(s.idtp, brute_idtp(&gt, &pred, radius));
        prop_assert_eq!(s.idf1, brute_idf1(&gt, &pred, radius));
        if s.idp + s.idr > 0.0 {
            prop_assert!((s.idf1 - 2.0 * s.idp * s.idr / (s.idp + s.idr)).abs() < 1e-12);
        }
    }

    #[test]
    fn hota_matches_direct_evaluation(seed in any::<u64>(), ids in 1u32..=5, frames in 1u32..=12) {
        let (gt, pred) = toy_scene(seed, ids, frames);
        let radius = 0.5 * avg_size(&gt);
        let alphas = default_alphas();
        let h = hota_suite(&gt, &pred, MatchCriterion::Center { radius }, &alphas).unwrap();
        let o = brute_hota(&gt, &pred, radius, &alphas);
        prop_assert_eq!((h.hota, h.deta, h.assa, h.la), (o.hota, o.deta, o.assa, o.la));
    }

    #[test]
    fn single_threshold_deta_is_da(seed in any::<u64>(), alpha in 0.05f64..0.95) {
        let (gt, pred) = toy_scene(seed, 4, 10);
        let radius = 0.5 * avg_size(&gt);
        let h = hota_suite(&gt, &pred, MatchCriterion::Center { radius }, &[alpha]).unwrap();
        prop_assert_eq!(h.deta, h.per_alpha[0].da);
    }

    #[test]
    fn rates_are_bounded_and_margins_partition(seed in any::<u64>(), ids in 1u32..=5, frames in 1u32..=20) {
        let (gt, pred) = toy_scene(seed, ids, frames);
        let e = evaluate_video("toy", &gt, &pred, &EvalConfig::default()).unwrap();
        let m = &e.metrics;
        for v in [m.precision, m.recall, m.hota, m.assa, m.deta, m.idf1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(m.mota <= 1.0);
        let g = &e.margin;
        prop_assert!((g.within_margin + g.not_within_margin + g.not_identified - 1.0).abs() <= 1e-9);
        prop_assert!((0.0..=1.0).contains(&g.false_positive));
        for (id, entry) in &e.completeness.entries {
            if let Completeness::Missing(frames) = entry {
                let gt_frames = gt.records().iter().filter(|r| r.id == *id).count();
                let pid = e.mapping.gt_to_pred()[id];
                let matched = gt
                    .records()
                    .iter()
                    .filter(|g| g.id == *id)
                    .filter(|g| pred.get(g.frame, pid).is_some_and(|p| dist(g, p) <= 0.5 * avg_size(&gt)))
                    .count();
                prop_assert_eq!(frames.len(), gt_frames - matched);
            }
        }
    }

    #[test]
    fn doubling_coordinates_changes_nothing(seed in any::<u64>(), ids in 1u32..=5, frames in 1u32..=15) {
        let (gt, pred) = toy_scene(seed, ids, frames);
        let double = |s: &TrackSet| {
            TrackSet::new(
                s.records().iter().map(|r| TrackRecord::new(r.frame, r.id, 2.0 * r.cx, 2.0 * r.cy, 2.0 * r.x_off, 2.0 * r.y_off)).collect(),
            )
            .unwrap()
        };
        let a = evaluate_video("v", &gt, &pred, &EvalConfig::default()).unwrap();
        let b = evaluate_video("v", &double(&gt), &double(&pred), &EvalConfig::default()).unwrap();
        prop_assert_eq!(a.metrics, b.metrics);
        prop_assert_eq!(a.margin.within_margin, b.margin.within_margin);
        prop_assert_eq!(a.margin.not_identified, b.margin.not_identified);
        prop_assert_eq!(a.completeness, b.completeness);
    }
}

#[test]
fn mapping_is_injective() {
    for seed in 0..200 {
        let (gt, pred) = toy_scene(seed, 5, 20);
        let (_, m) = evaluate(&gt, &pred);
        let targets: std::collections::BTreeSet<u32> = m.pairs.values().copied().collect();
        assert_eq!(targets.len(), m.pairs.len());
        assert!(m.pairs.keys().all(|p| !m.unmatched_pred.contains(p)));
    }
}

#[test]
fn alternating_prediction_ids_match_brute_force() {
    let gt = TrackSet::new((1..=10).map(|f| TrackRecord::new(f, 1, 10.0, 10.0, 4.0, 4.0)).collect()).unwrap();
    let pred = TrackSet::new((1..=10).map(|f| TrackRecord::new(f, 1 + f % 2, 10.5, 10.0, 4.0, 4.0)).collect()).unwrap();
    let (radius, m) = evaluate(&gt, &pred);
    let c = frame_confusion(&gt, &pred, &m);
    let o = brute_clear(&gt, &pred, radius, &m.gt_to_pred());
    assert_eq!(c.idsw, 9);
    assert_eq!(o.idsw, 9);
}
