//! Box overlap measures.
//!
//! Region unions are rasterised on the integer pixel grid: pixel `(i, j)` is
//! inside a box when its centre `(i + 0.5, j + 0.5)` satisfies
//! `x1 <= i + 0.5 < x2` and `y1 <= j + 0.5 < y2`. Counting runs on the
//! compressed grid of box edges, so cost depends on the box count only.

use super::{BoundingBox, DetectionSet};

/// Continuous IoU of two boxes.
pub fn box_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Half-open pixel index range covered along one axis.
fn pixel_span(lo: f64, hi: f64) -> (i64, i64) {
    ((lo - 0.5).ceil() as i64, (hi - 0.5).ceil() as i64)
}

struct Spans {
    x: (i64, i64),
    y: (i64, i64),
}

fn spans(boxes: &[BoundingBox]) -> Vec<Spans> {
    boxes
        .iter()
        .map(|b| Spans { x: pixel_span(b.x1, b.x2), y: pixel_span(b.y1, b.y2) })
        .filter(|s| s.x.0 < s.x.1 && s.y.0 < s.y.1)
        .collect()
}

fn covered(spans: &[Spans], x: i64, y: i64) -> bool {
    spans.iter().any(|s| s.x.0 <= x && x < s.x.1 && s.y.0 <= y && y < s.y.1)
}

/// Pixel counts `(|A|, |B|, |A ∩ B|)` of two rasterised unions.
fn union_counts(a: &[BoundingBox], b: &[BoundingBox]) -> (u64, u64, u64) {
    let (sa, sb) = (spans(a), spans(b));
    let mut xs: Vec<i64> = sa.iter().chain(&sb).flat_map(|s| [s.x.0, s.x.1]).collect();
    let mut ys: Vec<i64> = sa.iter().chain(&sb).flat_map(|s| [s.y.0, s.y.1]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let (mut na, mut nb, mut ni) = (0, 0, 0);
    for yw in ys.windows(2) {
        for xw in xs.windows(2) {
            let cell = ((xw[1] - xw[0]) * (yw[1] - yw[0])) as u64;
            let (ia, ib) = (covered(&sa, xw[0], yw[0]), covered(&sb, xw[0], yw[0]));
            if ia {
                na += cell;
            }
            if ib {
                nb += cell;
            }
            if ia && ib {
                ni += cell;
            }
        }
    }
    (na, nb, ni)
}

/// Number of pixels in the rasterised union of `boxes`.
pub fn rasterized_area(boxes: &[BoundingBox]) -> u64 {
    union_counts(boxes, &[]).0
}

/// Region IoU of the rasterised box unions of two detection sets.
///
/// Two empty regions score 1, an empty region against a non-empty one 0.
pub fn miou(pred: &DetectionSet, reference: &DetectionSet) -> f64 {
    let (na, nb, ni) = union_counts(&pred.boxes, &reference.boxes);
    let union = na + nb - ni;
    if union == 0 {
        1.0
    } else {
        ni as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(boxes: Vec<BoundingBox>) -> DetectionSet {
        DetectionSet { image_id: "a".into(), boxes }
    }

    #[test]
    fn half_overlap() {
        let p = set(vec![BoundingBox::new(0.0, 0.0, 10.0, 10.0)]);
        let r = set(vec![BoundingBox::new(5.0, 0.0, 15.0, 10.0)]);
        assert!((miou(&p, &r) - 50.0 / 150.0).abs() < 1e-15);
        assert_eq!(miou(&p, &r), miou(&r, &p));
    }

    #[test]
    fn empty_cases() {
        let e = set(vec![]);
        let p = set(vec![BoundingBox::new(0.0, 0.0, 2.0, 2.0)]);
        assert_eq!(miou(&e, &e), 1.0);
        assert_eq!(miou(&e, &p), 0.0);
        assert_eq!(miou(&p, &e), 0.0);
    }

    #[test]
    fn overlapping_boxes_in_one_set_count_once() {
        let p = set(vec![BoundingBox::new(0.0, 0.0, 4.0, 4.0), BoundingBox::new(2.0, 2.0, 6.0, 6.0)]);
        assert_eq!(rasterized_area(&p.boxes), 28);
        assert_eq!(miou(&p, &p), 1.0);
    }

    #[test]
    fn fractional_edges_use_pixel_centres() {
        // centres 0.5 and 1.5 fall in [0.4, 1.6)
        assert_eq!(rasterized_area(&[BoundingBox::new(0.4, 0.0, 1.6, 1.0)]), 2);
        assert_eq!(rasterized_area(&[BoundingBox::new(0.6, 0.0, 1.4, 1.0)]), 0);
    }

    #[test]
    fn continuous_iou() {
        let a = BoundingBox::new(0.0, 0.0, 2.0, 2.0);
        let b = BoundingBox::new(1.0, 0.0, 3.0, 2.0);
        assert!((box_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(box_iou(&a, &BoundingBox::new(5.0, 5.0, 6.0, 6.0)), 0.0);
    }
}
