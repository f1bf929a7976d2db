//! Ranked average precision and its class mean.

use std::collections::BTreeSet;

use super::boxes::box_iou;
use super::{BoundingBox, DetectionSet};
use crate::error::{Error, Result};

fn check_thresh(iou_thresh: f64) -> Result<()> {
    if !(iou_thresh > 0.0 && iou_thresh < 1.0) {
        return Err(Error::Argument(format!("IoU threshold {iou_thresh} outside (0, 1)")));
    }
    Ok(())
}

/// Average precision of `preds` against `refs`, all boxes treated as one
/// class.
///
/// Predictions are ranked by descending score (stable for ties) and matched
/// greedily, one-to-one and per image, to the unmatched reference of highest
/// IoU; a match needs `IoU >= iou_thresh`. The sweep sums
/// `(R_n - R_{n-1}) * P_n`. Without references the result is 1 when there
/// are no predictions either and 0 otherwise.
pub fn average_precision(preds: &[DetectionSet], refs: &[DetectionSet], iou_thresh: f64) -> Result<f64> {
    check_thresh(iou_thresh)?;
    for s in preds.iter().chain(refs) {
        s.validate()?;
    }
    let mut ranked: Vec<(&str, &BoundingBox, f64)> = Vec::new();
    for s in preds {
        for b in &s.boxes {
            let score =
                b.score.ok_or_else(|| Error::Argument(format!("prediction in `{}` has no score", s.image_id)))?;
            ranked.push((&s.image_id, b, score));
        }
    }
    let total_refs: usize = refs.iter().map(|s| s.boxes.len()).sum();
    if total_refs == 0 {
        return Ok(if ranked.is_empty() { 1.0 } else { 0.0 });
    }
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2));

    let ref_boxes =
        |id: &str| -> Vec<&BoundingBox> { refs.iter().filter(|s| s.image_id == id).flat_map(|s| &s.boxes).collect() };
    let mut used: std::collections::HashMap<&str, Vec<bool>> = Default::default();
    let (mut tp, mut ap, mut prev_recall) = (0usize, 0.0, 0.0);
    for (n, (id, b, _)) in ranked.iter().enumerate() {
        let candidates = ref_boxes(id);
        let taken = used.entry(id).or_insert_with(|| vec![false; candidates.len()]);
        let mut best: Option<(usize, f64)> = None;
        for (j, r) in candidates.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let iou = box_iou(b, r);
            if iou >= iou_thresh && best.is_none_or(|(_, v)| iou > v) {
                best = Some((j, iou));
            }
        }
        if let Some((j, _)) = best {
            taken[j] = true;
            tp += 1;
        }
        let precision = tp as f64 / (n + 1) as f64;
        let recall = tp as f64 / total_refs as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

fn filter_class(sets: &[DetectionSet], class_id: &str) -> Vec<DetectionSet> {
    sets.iter()
        .map(|s| DetectionSet {
            image_id: s.image_id.clone(),
            boxes: s.boxes.iter().filter(|b| b.class_id == class_id).cloned().collect(),
        })
        .collect()
}

/// Unweighted mean of per-class AP over the classes present in `refs`.
pub fn mean_ap(preds: &[DetectionSet], refs: &[DetectionSet], iou_thresh: f64) -> Result<f64> {
    let classes: BTreeSet<&str> = refs.iter().flat_map(|s| &s.boxes).map(|b| b.class_id.as_str()).collect();
    if classes.is_empty() {
        return Err(Error::Argument("no classes present in the references".into()));
    }
    let mut sum = 0.0;
    for c in &classes {
        sum += average_precision(&filter_class(preds, c), &filter_class(refs, c), iou_thresh)?;
    }
    Ok(sum / classes.len() as f64)
}
