//! RMSE for lane points and depth maps.

use super::LanePointSet;
use crate::error::{Error, Result};
use crate::stats::median;

/// `sqrt(sum |a_i - b_i|^2 / N)` over index-paired 2-D points.
pub fn rmse_point_pairs(a: &[[f64; 2]], b: &[[f64; 2]]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Argument(format!("cannot pair {} with {} points", a.len(), b.len())));
    }
    let sum: f64 = a.iter().zip(b).map(|(p, q)| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// x-coordinate of the polyline at row `y`: linear along the first segment
/// spanning `y`, else the x of the endpoint nearest in `y`.
fn x_at(points: &[[f64; 2]], y: f64) -> f64 {
    for s in points.windows(2) {
        let (lo, hi) = (s[0][1].min(s[1][1]), s[0][1].max(s[1][1]));
        if lo <= y && y <= hi {
            if s[1][1] == s[0][1] {
                return 0.5 * (s[0][0] + s[1][0]);
            }
            let u = (y - s[0][1]) / (s[1][1] - s[0][1]);
            return s[0][0] + u * (s[1][0] - s[0][0]);
        }
    }
    let nearest =
        points.iter().min_by(|p, q| (p[1] - y).abs().total_cmp(&(q[1] - y).abs())).expect("validated polyline");
    nearest[0]
}

/// Samples `lane` at every integer row in `[y_lo, y_hi]`.
pub fn resample_lane(lane: &LanePointSet, y_lo: f64, y_hi: f64) -> Result<Vec<[f64; 2]>> {
    lane.validate()?;
    let rows: Vec<f64> = ((y_lo.ceil() as i64)..=(y_hi.floor() as i64)).map(|y| y as f64).collect();
    Ok(rows.into_iter().map(|y| [x_at(&lane.points, y), y]).collect())
}

/// Lane RMSE with both polylines resampled at the integer rows spanned by the
/// reference.
pub fn rmse_points(pred: &LanePointSet, reference: &LanePointSet) -> Result<f64> {
    pred.validate()?;
    reference.validate()?;
    let ys = reference.points.iter().map(|p| p[1]);
    let (lo, hi) = (ys.clone().fold(f64::INFINITY, f64::min), ys.fold(f64::NEG_INFINITY, f64::max));
    let r = resample_lane(reference, lo, hi)?;
    if r.is_empty() {
        return Err(Error::Argument(format!("reference lane in `{}` spans no integer row", reference.image_id)));
    }
    let p = resample_lane(pred, lo, hi)?;
    rmse_point_pairs(&p, &r)
}

/// Depth RMSE over masked pixels after scaling `pred` by the median of
/// `ref / pred` (pixels with `pred > 0`).
pub fn rmse_depth(pred: &[f64], reference: &[f64], mask: Option<&[bool]>) -> Result<f64> {
    if pred.len() != reference.len() || mask.is_some_and(|m| m.len() != pred.len()) {
        return Err(Error::Argument("depth maps and mask must have equal size".into()));
    }
    if pred.iter().chain(reference).any(|v| !v.is_finite()) {
        return Err(Error::Argument("depth maps must be finite".into()));
    }
    let idx: Vec<usize> = (0..pred.len()).filter(|&i| mask.is_none_or(|m| m[i])).collect();
    if idx.is_empty() {
        return Err(Error::Argument("depth mask selects no pixels".into()));
    }
    let ratios: Vec<f64> = idx.iter().filter(|&&i| pred[i] > 0.0).map(|&i| reference[i] / pred[i]).collect();
    if ratios.is_empty() {
        return Err(Error::Argument("no positive predicted depth to align".into()));
    }
    let s = median(&ratios);
    let sum: f64 = idx.iter().map(|&i| (s * pred[i] - reference[i]).powi(2)).sum();
    Ok((sum / idx.len() as f64).sqrt())
}
