//! Multi-object tracking accuracy and precision.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::boxes::box_iou;
use super::TrackFrame;
use crate::error::{Error, Result};

/// Accumulated tracking counts and the two scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotSummary {
    pub mota: f64,
    /// `1 - sum(1 - IoU) / matches`; 0 when nothing was matched.
    pub motp: f64,
    pub false_negatives: usize,
    pub false_positives: usize,
    pub id_switches: usize,
    pub ground_truth: usize,
    pub matches: usize,
}

/// Scores predicted tracks against reference tracks, frames aligned by `t`.
///
/// Each frame first keeps the pairings of earlier frames that still overlap
/// by at least `iou_thresh`, then pairs the rest greedily by descending IoU.
/// An identity switch is counted when a reference target is matched to a
/// different predicted id than at its previous match.
pub fn mota_motp(preds: &[TrackFrame], refs: &[TrackFrame], iou_thresh: f64) -> Result<MotSummary> {
    if !(iou_thresh > 0.0 && iou_thresh < 1.0) {
        return Err(Error::Argument(format!("IoU threshold {iou_thresh} outside (0, 1)")));
    }
    let index = |frames: &[TrackFrame]| -> Result<BTreeMap<u64, usize>> {
        let mut m = BTreeMap::new();
        for (i, f) in frames.iter().enumerate() {
            f.validate()?;
            if m.insert(f.t, i).is_some() {
                return Err(Error::Argument(format!("frame {} appears twice", f.t)));
            }
        }
        Ok(m)
    };
    let (pi, ri) = (index(preds)?, index(refs)?);
    let times: BTreeSet<u64> = pi.keys().chain(ri.keys()).copied().collect();

    let mut last_match: HashMap<u64, u64> = HashMap::new();
    let (mut fn_, mut fp, mut ids, mut gt, mut matches) = (0, 0, 0, 0, 0);
    let mut dist = 0.0;
    for t in times {
        let p = pi.get(&t).map_or(&[][..], |&i| &preds[i].entries[..]);
        let r = ri.get(&t).map_or(&[][..], |&i| &refs[i].entries[..]);
        gt += r.len();
        let iou: Vec<Vec<f64>> = r.iter().map(|re| p.iter().map(|pe| box_iou(&re.bbox, &pe.bbox)).collect()).collect();
        let mut r_used = vec![false; r.len()];
        let mut p_used = vec![false; p.len()];
        let mut pairs: Vec<(usize, usize)> = Vec::new();

        for (a, re) in r.iter().enumerate() {
            if let Some(&pid) = last_match.get(&re.id) {
                if let Some(b) = p.iter().position(|pe| pe.id == pid) {
                    if !p_used[b] && iou[a][b] >= iou_thresh {
                        r_used[a] = true;
                        p_used[b] = true;
                        pairs.push((a, b));
                    }
                }
            }
        }
        let mut candidates: Vec<(usize, usize)> = (0..r.len())
            .flat_map(|a| (0..p.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| !r_used[a] && !p_used[b] && iou[a][b] >= iou_thresh)
            .collect();
        candidates.sort_by(|x, y| iou[y.0][y.1].total_cmp(&iou[x.0][x.1]));
        for (a, b) in candidates {
            if !r_used[a] && !p_used[b] {
                r_used[a] = true;
                p_used[b] = true;
                pairs.push((a, b));
            }
        }

        for &(a, b) in &pairs {
            if last_match.insert(r[a].id, p[b].id).is_some_and(|prev| prev != p[b].id) {
                ids += 1;
            }
            dist += 1.0 - iou[a][b];
        }
        matches += pairs.len();
        fn_ += r.len() - pairs.len();
        fp += p.len() - pairs.len();
    }
    if gt == 0 {
        return Err(Error::Undefined("MOTA needs at least one ground-truth object".into()));
    }
    Ok(MotSummary {
        mota: 1.0 - (fn_ + fp + ids) as f64 / gt as f64,
        motp: if matches > 0 { 1.0 - dist / matches as f64 } else { 0.0 },
        false_negatives: fn_,
        false_positives: fp,
        id_switches: ids,
        ground_truth: gt,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{BoundingBox, TrackEntry};
    use super::*;

    fn entry(id: u64, x: f64) -> TrackEntry {
        TrackEntry { id, bbox: BoundingBox::new(x, 0.0, x + 10.0, 10.0) }
    }

    fn frame(t: u64, entries: Vec<TrackEntry>) -> TrackFrame {
        TrackFrame { t, entries }
    }

    #[test]
    fn perfect_tracking() {
        let f: Vec<TrackFrame> = (0..4).map(|t| frame(t, vec![entry(1, 0.0), entry(2, 50.0)])).collect();
        let s = mota_motp(&f, &f, 0.5).unwrap();
        assert_eq!((s.mota, s.motp), (1.0, 1.0));
    }

    #[test]
    fn one_miss_one_false_positive() {
        let refs: Vec<TrackFrame> = (0..5).map(|t| frame(t, vec![entry(1, 0.0), entry(2, 50.0)])).collect();
        let mut preds = refs.clone();
        preds[2].entries.pop();
        preds[3].entries.push(entry(9, 200.0));
        let s = mota_motp(&preds, &refs, 0.5).unwrap();
        assert_eq!((s.false_negatives, s.false_positives, s.id_switches, s.ground_truth), (1, 1, 0, 10));
        assert!((s.mota - 0.8).abs() < 1e-15);
    }

    #[test]
    fn no_ground_truth_is_undefined() {
        let f = vec![frame(0, vec![entry(1, 0.0)])];
        assert!(matches!(mota_motp(&f, &[], 0.5), Err(Error::Undefined(_))));
    }

    #[test]
    fn persistence_prefers_previous_pairing() {
        // pred 8 keeps following target 1 although pred 7 overlaps it more
        let refs = vec![frame(0, vec![entry(1, 0.0)]), frame(1, vec![entry(1, 0.0)])];
        let preds = vec![frame(0, vec![entry(8, 0.0)]), frame(1, vec![entry(7, 0.0), entry(8, 2.0)])];
        let s = mota_motp(&preds, &refs, 0.5).unwrap();
        assert_eq!(s.id_switches, 0);
        assert_eq!(s.false_positives, 1);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let f = vec![frame(0, vec![entry(1, 0.0), entry(1, 50.0)])];
        assert!(mota_motp(&f, &f, 0.5).is_err());
    }
}
