use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::boxes::{iou, BBox, Detection2D};
use super::hungarian::hungarian;

type State = SVector<f64, 7>;
type Cov = SMatrix<f64, 7, 7>;
type Meas = SVector<f64, 4>;
type MeasCov = SMatrix<f64, 4, 4>;
type Obs = SMatrix<f64, 4, 7>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SortConfig {
    pub iou_min: f64,
    pub max_age: u32,
    pub min_hits: u32,
    pub dt: f64,
    /// Process variance of u, v and s per step (px², px⁴ for s).
    pub pos_var: f64,
    /// Process variance of the rates.
    pub vel_var: f64,
    /// Process variance of the aspect ratio.
    pub ratio_var: f64,
    pub meas_var: f64,
}

impl Default for SortConfig {
    fn default() -> Self {
        SortConfig {
            iou_min: 0.3,
            max_age: 3,
            min_hits: 3,
            dt: 1.0 / 15.0,
            pos_var: 1.0,
            vel_var: 10.0,
            ratio_var: 1e-2,
            meas_var: 1.0,
        }
    }
}

/// Constant-velocity Kalman track over `[u, v, s, r, u', v', s']`, with `s`
/// the box area and `r` the (constant) aspect ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct Track2D {
    pub id: u64,
    pub state: State,
    pub covariance: Cov,
    pub hits: u32,
    pub age_since_update: u32,
    /// Innovation norm of the most recent update.
    pub last_innovation: Option<f64>,
}

const MIN_SCALE: f64 = 1e-6;

fn measurement(b: &BBox) -> Meas {
    Meas::new(b.cx, b.cy, b.w * b.h, b.w / b.h)
}

fn observation() -> Obs {
    let mut h = Obs::zeros();
    for i in 0..4 {
        h[(i, i)] = 1.0;
    }
    h
}

impl Track2D {
    pub fn new(id: u64, b: &BBox) -> Self {
        let z = measurement(b);
        let mut state = State::zeros();
        state.fixed_rows_mut::<4>(0).copy_from(&z);
        let covariance = Cov::from_diagonal(&SVector::from([10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4]));
        Track2D { id, state, covariance, hits: 1, age_since_update: 0, last_innovation: None }
    }

    pub fn bbox(&self) -> BBox {
        let s = self.state[2].max(MIN_SCALE);
        let r = self.state[3].max(MIN_SCALE);
        let w = (s * r).sqrt();
        BBox { cx: self.state[0], cy: self.state[1], w, h: s / w }
    }

    pub fn predict(&mut self, cfg: &SortConfig) {
        if self.state[2] + self.state[6] * cfg.dt <= 0.0 {
            self.state[6] = 0.0;
        }
        let mut f = Cov::identity();
        f[(0, 4)] = cfg.dt;
        f[(1, 5)] = cfg.dt;
        f[(2, 6)] = cfg.dt;
        let q = Cov::from_diagonal(&SVector::from([
            cfg.pos_var,
            cfg.pos_var,
            cfg.pos_var,
            cfg.ratio_var,
            cfg.vel_var,
            cfg.vel_var,
            cfg.vel_var,
        ]));
        self.state = f * self.state;
        self.covariance = f * self.covariance * f.transpose() + q;
        symmetrize(&mut self.covariance);
        self.age_since_update += 1;
    }

    pub fn update(&mut self, b: &BBox, cfg: &SortConfig) {
        let h = observation();
        let r = MeasCov::identity() * cfg.meas_var;
        let y = measurement(b) - h * self.state;
        let s = h * self.covariance * h.transpose() + r;
        // s is SPD: P is SPD and R positive definite
        let s_inv = s.try_inverse().expect("innovation covariance is positive definite");
        let k = self.covariance * h.transpose() * s_inv;
        self.state += k * y;
        let ikh = Cov::identity() - k * h;
        self.covariance = ikh * self.covariance * ikh.transpose() + k * r * k.transpose();
        symmetrize(&mut self.covariance);
        self.state[2] = self.state[2].max(MIN_SCALE);
        self.state[3] = self.state[3].max(MIN_SCALE);
        self.hits += 1;
        self.age_since_update = 0;
        self.last_innovation = Some(y.norm());
    }

    pub fn is_confirmed(&self, cfg: &SortConfig) -> bool {
        self.hits >= cfg.min_hits
    }
}

fn symmetrize(p: &mut Cov) {
    *p = (*p + p.transpose()) * 0.5;
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SortStep {
    /// Track id attached to each detection, in detection order.
    pub detection_ids: Vec<u64>,
    pub new_ids: Vec<u64>,
    pub removed_ids: Vec<u64>,
}

/// One tracking-by-detection step: predict, associate by `1 - IoU` with the
/// Hungarian method (pairs below `iou_min` forbidden), update, spawn, retire.
pub fn sort_step(
    tracks: &mut Vec<Track2D>,
    detections: &[Detection2D],
    cfg: &SortConfig,
    next_id: &mut u64,
) -> SortStep {
    const FORBIDDEN: f64 = 1e6;
    for t in tracks.iter_mut() {
        t.predict(cfg);
    }
    let predicted: Vec<BBox> = tracks.iter().map(Track2D::bbox).collect();
    let cost: Vec<Vec<f64>> = predicted
        .iter()
        .map(|p| {
            detections
                .iter()
                .map(|d| {
                    let o = iou(p, &d.bbox);
                    if o < cfg.iou_min {
                        FORBIDDEN
                    } else {
                        1.0 - o
                    }
                })
                .collect()
        })
        .collect();
    let mut det_track: Vec<Option<usize>> = vec![None; detections.len()];
    for (ti, di) in hungarian(&cost) {
        if cost[ti][di] < FORBIDDEN {
            det_track[di] = Some(ti);
        }
    }
    let mut out = SortStep::default();
    for (di, d) in detections.iter().enumerate() {
        match det_track[di] {
            Some(ti) => {
                tracks[ti].update(&d.bbox, cfg);
                out.detection_ids.push(tracks[ti].id);
            }
            None => {
                let id = *next_id;
                *next_id += 1;
                tracks.push(Track2D::new(id, &d.bbox));
                out.detection_ids.push(id);
                out.new_ids.push(id);
            }
        }
    }
    tracks.retain(|t| {
        let keep = t.age_since_update <= cfg.max_age;
        if !keep {
            out.removed_ids.push(t.id);
        }
        keep
    });
    out
}

/// Owns the track list and id counter; ids start at 0 and are never reused.
#[derive(Debug, Clone, Default)]
pub struct SortTracker {
    pub cfg: SortConfig,
    pub tracks: Vec<Track2D>,
    next_id: u64,
}

impl SortTracker {
    pub fn new(cfg: SortConfig) -> Self {
        SortTracker { cfg, tracks: Vec::new(), next_id: 0 }
    }

    pub fn step(&mut self, detections: &[Detection2D]) -> SortStep {
        sort_step(&mut self.tracks, detections, &self.cfg, &mut self.next_id)
    }

    /// Confirmed tracks updated in the latest step.
    pub fn confirmed(&self) -> impl Iterator<Item = &Track2D> {
        self.tracks.iter().filter(|t| t.age_since_update == 0 && t.is_confirmed(&self.cfg))
    }
}
