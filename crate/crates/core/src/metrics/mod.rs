//! Scoring of serialized perception outputs against ground truth.
//!
//! Detection sets are compared by region IoU and ranked average precision,
//! tracks by MOTA/MOTP, lane polylines and depth maps by RMSE. Inputs are
//! JSON Lines records; reports are JSON records plus a CSV summary.

mod boxes;
mod detection;
mod io;
mod rmse;
mod tracking;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boxes::{box_iou, miou, rasterized_area};
pub use detection::{average_precision, mean_ap};
pub use io::{read_jsonl, write_csv, write_reports, ScoreRecord};
pub use rmse::{resample_lane, rmse_depth, rmse_point_pairs, rmse_points};
pub use tracking::{mota_motp, MotSummary};

/// Default IoU threshold for matching.
pub const DEFAULT_IOU_THRESH: f64 = 0.5;

/// Axis-aligned box in pixel coordinates, `x1 < x2`, `y1 < y2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundingBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    #[serde(rename = "class", default)]
    pub class_id: String,
    /// Confidence in `[0, 1]`, predictions only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl BoundingBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2, class_id: String::new(), score: None }
    }

    pub fn with_class(mut self, class_id: impl Into<String>) -> Self {
        self.class_id = class_id.into();
        self
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = Some(score);
        self
    }

    pub fn area(&self) -> f64 {
        (self.x2 - self.x1) * (self.y2 - self.y1)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x1, self.y1, self.x2, self.y2].iter().all(|v| v.is_finite());
        if !finite || self.x1 >= self.x2 || self.y1 >= self.y2 {
            return Err(Error::Argument(format!("invalid box [{}, {}, {}, {}]", self.x1, self.y1, self.x2, self.y2)));
        }
        if let Some(s) = self.score {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Argument(format!("score {s} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// All boxes reported for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSet {
    pub image_id: String,
    pub boxes: Vec<BoundingBox>,
}

impl DetectionSet {
    pub fn validate(&self) -> Result<()> {
        if self.image_id.is_empty() {
            return Err(Error::Argument("detection set has an empty image_id".into()));
        }
        self.boxes.iter().try_for_each(BoundingBox::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackEntry {
    pub id: u64,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

/// Tracked boxes at frame `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackFrame {
    pub t: u64,
    pub entries: Vec<TrackEntry>,
}

impl TrackFrame {
    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<u64> = self.entries.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument(format!("duplicate track id in frame {}", self.t)));
        }
        self.entries.iter().try_for_each(|e| e.bbox.validate())
    }
}

/// Sampled points of one lane line, in drawing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanePointSet {
    pub image_id: String,
    pub points: Vec<[f64; 2]>,
}

impl LanePointSet {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::Argument(format!(
                "lane in `{}` has {} points, need at least 2",
                self.image_id,
                self.points.len()
            )));
        }
        if self.points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("lane in `{}` has non-finite points", self.image_id)));
        }
        Ok(())
    }
}
