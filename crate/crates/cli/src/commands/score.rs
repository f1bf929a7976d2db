use std::collections::BTreeMap;
use std::path::Path;

use glarekit::metrics::{
    average_precision, mean_ap, miou, mota_motp, read_jsonl, rmse_depth, rmse_points, write_csv, write_reports,
    DetectionSet, LanePointSet, ScoreRecord, TrackFrame,
};
use glarekit::radiance::load_image;
use glarekit::stats::log_rmse;
use glarekit::RadianceMap;

use crate::cli::{Metric, ScoreArgs};
use crate::error::{CliError, CliResult};

/// Offset below which log differences are not resolved, relative to the
/// reference maximum.
pub const LOG_RMSE_EPS: f64 = 1e-6;

fn mismatch(what: &str) -> CliError {
    CliError::Lib(glarekit::Error::Argument(what.into()))
}

/// Mean per-image MIoU over the reference image ids; a missing prediction
/// counts as an empty set.
fn score_miou(preds: &[DetectionSet], refs: &[DetectionSet]) -> CliResult<f64> {
    if refs.is_empty() {
        return Err(mismatch("no reference images"));
    }
    let by_id: BTreeMap<&str, &DetectionSet> = preds.iter().map(|p| (p.image_id.as_str(), p)).collect();
    let mut total = 0.0;
    for r in refs {
        r.validate()?;
        let empty = DetectionSet { image_id: r.image_id.clone(), boxes: Vec::new() };
        let p = by_id.get(r.image_id.as_str()).copied().unwrap_or(&empty);
        p.validate()?;
        total += miou(p, r);
    }
    Ok(total / refs.len() as f64)
}

/// Mean per-lane RMSE; lanes pair up by image id and order within the image.
fn score_lanes(preds: &[LanePointSet], refs: &[LanePointSet]) -> CliResult<f64> {
    if refs.is_empty() {
        return Err(mismatch("no reference lanes"));
    }
    let mut by_id: BTreeMap<&str, Vec<&LanePointSet>> = BTreeMap::new();
    for p in preds {
        by_id.entry(p.image_id.as_str()).or_default().push(p);
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total = 0.0;
    for r in refs {
        let k = seen.entry(r.image_id.as_str()).or_default();
        let p = by_id
            .get(r.image_id.as_str())
            .and_then(|v| v.get(*k))
            .ok_or_else(|| mismatch(&format!("no predicted lane {} for image `{}`", *k, r.image_id)))?;
        *k += 1;
        total += rmse_points(p, r)?;
    }
    Ok(total / refs.len() as f64)
}

fn load_pair(pred: &Path, reference: &Path) -> CliResult<(RadianceMap, RadianceMap)> {
    let (p, r) = (load_image(pred)?, load_image(reference)?);
    if !p.same_shape(&r) {
        return Err(CliError::Lib(glarekit::Error::Dimension(format!(
            "{}x{}x{} prediction against {}x{}x{} reference",
            p.width(),
            p.height(),
            p.channels(),
            r.width(),
            r.height(),
            r.channels()
        ))));
    }
    Ok((p, r))
}

/// Log-RMSE between two linear images over all samples.
pub fn image_log_rmse(pred: &RadianceMap, reference: &RadianceMap) -> ScoreRecord {
    let eps = LOG_RMSE_EPS * reference.max().max(f64::MIN_POSITIVE);
    ScoreRecord {
        metric: Metric::LogRmse.name().into(),
        value: log_rmse(pred.data(), reference.data(), None, eps),
        support: reference.data().len(),
    }
}

pub fn compute(
    metric: Metric,
    pred: &Path,
    reference: &Path,
    iou_thresh: f64,
    mask: Option<&Path>,
) -> CliResult<ScoreRecord> {
    let name = metric.name().to_string();
    let (value, support) = match metric {
        Metric::Miou => {
            let refs: Vec<DetectionSet> = read_jsonl(reference)?;
            (score_miou(&read_jsonl(pred)?, &refs)?, refs.len())
        }
        Metric::Ap | Metric::Map => {
            let refs: Vec<DetectionSet> = read_jsonl(reference)?;
            let preds: Vec<DetectionSet> = read_jsonl(pred)?;
            let v = if metric == Metric::Ap {
                average_precision(&preds, &refs, iou_thresh)?
            } else {
                mean_ap(&preds, &refs, iou_thresh)?
            };
            (v, refs.len())
        }
        Metric::Mota | Metric::Motp => {
            let refs: Vec<TrackFrame> = read_jsonl(reference)?;
            let s = mota_motp(&read_jsonl(pred)?, &refs, iou_thresh)?;
            (if metric == Metric::Mota { s.mota } else { s.motp }, refs.len())
        }
        Metric::RmseLane => {
            let refs: Vec<LanePointSet> = read_jsonl(reference)?;
            (score_lanes(&read_jsonl(pred)?, &refs)?, refs.len())
        }
        Metric::RmseDepth => {
            let (p, r) = load_pair(pred, reference)?;
            let m = match mask {
                Some(path) => {
                    let m = load_image(path)?;
                    if m.data().len() != r.data().len() {
                        return Err(mismatch("mask size differs from the depth maps"));
                    }
                    Some(m.data().iter().map(|v| *v != 0.0).collect::<Vec<bool>>())
                }
                None => None,
            };
            let support = m.as_ref().map_or(r.data().len(), |m| m.iter().filter(|v| **v).count());
            (rmse_depth(p.data(), r.data(), m.as_deref())?, support)
        }
        Metric::LogRmse => {
            let (p, r) = load_pair(pred, reference)?;
            return Ok(image_log_rmse(&p, &r));
        }
    };
    Ok(ScoreRecord { metric: name, value, support })
}

pub fn run(args: &ScoreArgs) -> CliResult<()> {
    let record = compute(args.metric, &args.pred, &args.reference, args.iou_thresh, args.mask.as_deref())?;
    println!("{:?}", record.value);
    let records = [record];
    if let Some(r) = &args.report {
        write_reports(&records, r)?;
    }
    if let Some(c) = &args.csv {
        write_csv(&records, c)?;
    }
    Ok(())
}
