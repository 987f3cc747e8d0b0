//! Detection streams (JSON Lines) and tracker output (CSV).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BBox, Detection2D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub t: f64,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_id: Option<i64>,
}

impl DetectionRecord {
    pub fn detection(&self) -> Detection2D {
        Detection2D { t: self.t, bbox: BBox { cx: self.cx, cy: self.cy, w: self.w, h: self.h }, score: self.score }
    }
}

pub fn write_detections(records: &[DetectionRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("plain struct serializes"));
        s.push('\n');
    }
    s
}

pub fn read_detections(text: &str) -> Result<Vec<DetectionRecord>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: DetectionRecord = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        if !(r.w > 0.0 && r.h > 0.0) {
            return Err(format!("line {}: box must have positive size", i + 1));
        }
        out.push(r);
    }
    Ok(out)
}

/// Groups records into frames of equal `t`, preserving order of appearance.
pub fn frames(records: &[DetectionRecord]) -> Vec<(f64, Vec<DetectionRecord>)> {
    let mut out: Vec<(f64, Vec<DetectionRecord>)> = Vec::new();
    for r in records {
        match out.last_mut() {
            Some((t, v)) if *t == r.t => v.push(*r),
            _ => out.push((r.t, vec![*r])),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRow {
    pub t: f64,
    pub track_id: u64,
    pub bbox: BBox,
}

pub fn write_tracks_csv(rows: &[TrackRow]) -> String {
    let mut s = String::from("t,track_id,cx,cy,w,h\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.t, r.track_id, r.bbox.cx, r.bbox.cy, r.bbox.w, r.bbox.h);
    }
    s
}
