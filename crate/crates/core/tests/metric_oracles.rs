//! Scoring functions against hand-worked cases and closed forms.

use glarekit::metrics::{
    average_precision, mean_ap, miou, mota_motp, rmse_depth, rmse_point_pairs, rmse_points, BoundingBox, DetectionSet,
    LanePointSet, TrackEntry, TrackFrame,
};

fn set(id: &str, boxes: Vec<BoundingBox>) -> DetectionSet {
    DetectionSet { image_id: id.into(), boxes }
}

fn int_box(x1: i64, y1: i64, x2: i64, y2: i64) -> BoundingBox {
    BoundingBox::new(x1 as f64, y1 as f64, x2 as f64, y2 as f64)
}

fn area(b: (i64, i64, i64, i64)) -> i64 {
    (b.2 - b.0) * (b.3 - b.1)
}

fn overlap(a: (i64, i64, i64, i64), b: (i64, i64, i64, i64)) -> (i64, i64, i64, i64) {
    let r = (a.0.max(b.0), a.1.max(b.1), a.2.min(b.2), a.3.min(b.3));
    if r.0 < r.2 && r.1 < r.3 {
        r
    } else {
        (0, 0, 0, 0)
    }
}

/// Every integer box inside an `n x n` frame, subsampled by `step`.
fn boxes(n: i64, step: usize) -> Vec<(i64, i64, i64, i64)> {
    let mut out = Vec::new();
    for x1 in 0..n {
        for x2 in x1 + 1..=n {
            for y1 in 0..n {
                for y2 in y1 + 1..=n {
                    out.push((x1, y1, x2, y2));
                }
            }
        }
    }
    out.into_iter().step_by(step).collect()
}

#[test]
fn miou_single_boxes_exhaustive_small_grid() {
    let all = boxes(5, 1);
    for &a in &all {
        for &b in &all {
            let i = area(overlap(a, b));
            let expected = i as f64 / (area(a) + area(b) - i) as f64;
            let got = miou(&set("x", vec![int_box(a.0, a.1, a.2, a.3)]), &set("x", vec![int_box(b.0, b.1, b.2, b.3)]));
            assert_eq!(got, expected, "{a:?} {b:?}");
        }
    }
}

#[test]
fn miou_two_box_unions_by_inclusion_exclusion() {
    // predicted region = union of two boxes, reference = one box
    let pool = boxes(20, 997);
    let refs = boxes(20, 3001);
    for &a in &pool {
        for &b in pool.iter().rev().take(40) {
            for &r in &refs {
                let union_p = area(a) + area(b) - area(overlap(a, b));
                let inter = area(overlap(a, r)) + area(overlap(b, r)) - area(overlap(overlap(a, b), r));
                let expected = inter as f64 / (union_p + area(r) - inter) as f64;
                let p = set("x", vec![int_box(a.0, a.1, a.2, a.3), int_box(b.0, b.1, b.2, b.3)]);
                let got = miou(&p, &set("x", vec![int_box(r.0, r.1, r.2, r.3)]));
                assert_eq!(got, expected, "{a:?} {b:?} {r:?}");
            }
        }
    }
}

#[test]
fn ap_perfect_detections() {
    let refs =
        vec![set("a", vec![int_box(0, 0, 10, 10), int_box(20, 20, 30, 30)]), set("b", vec![int_box(5, 5, 9, 9)])];
    let preds: Vec<DetectionSet> =
        refs.iter().map(|s| set(&s.image_id, s.boxes.iter().map(|b| b.clone().with_score(0.9)).collect())).collect();
    assert_eq!(average_precision(&preds, &refs, 0.5).unwrap(), 1.0);
}

#[test]
fn map_of_one_one_and_half() {
    let refs = vec![set(
        "a",
        vec![
            int_box(0, 0, 10, 10).with_class("car"),
            int_box(20, 0, 30, 10).with_class("person"),
            int_box(40, 0, 50, 10).with_class("sign"),
            int_box(60, 0, 70, 10).with_class("sign"),
        ],
    )];
    let preds = vec![set(
        "a",
        vec![
            int_box(0, 0, 10, 10).with_class("car").with_score(0.9),
            int_box(20, 0, 30, 10).with_class("person").with_score(0.8),
            // one of two signs found: recall 0.5 at precision 1
            int_box(40, 0, 50, 10).with_class("sign").with_score(0.7),
        ],
    )];
    let m = mean_ap(&preds, &refs, 0.5).unwrap();
    assert!((m - 2.5 / 3.0).abs() < 1e-12);
    assert_eq!(format!("{m:.4}"), "0.8333");
}

#[test]
fn ap_ranked_sweep() {
    // ranks: TP, FP, TP over two references
    let refs = vec![set("a", vec![int_box(0, 0, 10, 10), int_box(20, 0, 30, 10)])];
    let preds = vec![set(
        "a",
        vec![
            int_box(0, 0, 10, 10).with_score(0.9),
            int_box(50, 50, 60, 60).with_score(0.8),
            int_box(20, 0, 30, 10).with_score(0.7),
        ],
    )];
    // 0.5 * 1 + 0.5 * 2/3
    let ap = average_precision(&preds, &refs, 0.5).unwrap();
    assert!((ap - (0.5 + 1.0 / 3.0)).abs() < 1e-12);
}

fn entry(id: u64, x: f64) -> TrackEntry {
    TrackEntry { id, bbox: BoundingBox::new(x, 0.0, x + 10.0, 10.0) }
}

#[test]
fn mota_two_errors_in_ten() {
    let refs: Vec<TrackFrame> =
        (0..5).map(|t| TrackFrame { t, entries: vec![entry(1, 0.0), entry(2, 40.0)] }).collect();
    let mut preds = refs.clone();
    preds[1].entries.remove(0);
    preds[4].entries.push(entry(7, 100.0));
    let s = mota_motp(&preds, &refs, 0.5).unwrap();
    assert!((s.mota - 0.8).abs() < 1e-15);
    assert_eq!(s.motp, 1.0);
}

#[test]
fn identity_switch_is_counted_once() {
    let refs: Vec<TrackFrame> = (0..4).map(|t| TrackFrame { t, entries: vec![entry(1, 0.0)] }).collect();
    let preds: Vec<TrackFrame> =
        (0..4).map(|t| TrackFrame { t, entries: vec![entry(if t < 2 { 10 } else { 11 }, 0.0)] }).collect();
    let s = mota_motp(&preds, &refs, 0.5).unwrap();
    assert_eq!(s.id_switches, 1);
    assert!((s.mota - 0.75).abs() < 1e-15);
}

#[test]
fn rmse_identity_cases() {
    let pts = [[1.0, 2.0], [3.5, 4.0], [-2.0, 7.0]];
    assert_eq!(rmse_point_pairs(&pts, &pts).unwrap(), 0.0);
    let lane = LanePointSet { image_id: "a".into(), points: vec![[10.0, 0.0], [14.0, 8.0], [20.0, 20.0]] };
    assert_eq!(rmse_points(&lane, &lane).unwrap(), 0.0);
    let depth: Vec<f64> = (1..50).map(|i| i as f64 * 0.7).collect();
    assert_eq!(rmse_depth(&depth, &depth, None).unwrap(), 0.0);
    let scaled: Vec<f64> = depth.iter().map(|d| d * 4.0).collect();
    assert!(rmse_depth(&scaled, &depth, None).unwrap() < 1e-12);
}

#[test]
fn lane_offset_gives_offset() {
    let a = LanePointSet { image_id: "a".into(), points: vec![[10.0, 0.0], [10.0, 10.0]] };
    let b = LanePointSet { image_id: "a".into(), points: vec![[13.0, 0.0], [13.0, 10.0]] };
    assert!((rmse_points(&b, &a).unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn swapped_identities_count_two_switches() {
    let refs: Vec<TrackFrame> =
        (0..3).map(|t| TrackFrame { t, entries: vec![entry(1, 0.0), entry(2, 40.0)] }).collect();
    let preds: Vec<TrackFrame> = (0..3)
        .map(|t| {
            let (a, b) = if t == 0 { (10, 20) } else { (20, 10) };
            TrackFrame { t, entries: vec![entry(a, 0.0), entry(b, 40.0)] }
        })
        .collect();
    let s = mota_motp(&preds, &refs, 0.5).unwrap();
    assert_eq!(s.id_switches, 2);
    assert!((s.mota - (1.0 - 2.0 / 6.0)).abs() < 1e-15);
}

#[test]
fn true_positive_ranked_above_false_positive() {
    let refs = vec![set("a", vec![int_box(0, 0, 10, 10)])];
    let preds = vec![set("a", vec![int_box(0, 0, 10, 10).with_score(0.9), int_box(30, 30, 40, 40).with_score(0.5)])];
    assert_eq!(average_precision(&preds, &refs, 0.5).unwrap(), 1.0);
}

#[test]
fn depth_two_by_two_by_hand() {
    // ratios 2, 2, 2, 2.25 -> median 2; scaled prediction 2, 4, 4, 8
    let pred = [1.0, 2.0, 2.0, 4.0];
    let reference = [2.0, 4.0, 4.0, 9.0];
    assert!((rmse_depth(&pred, &reference, None).unwrap() - 0.5).abs() < 1e-15);
    let mask = [true, true, true, false];
    assert_eq!(rmse_depth(&pred, &reference, Some(&mask)).unwrap(), 0.0);
}
