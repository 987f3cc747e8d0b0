//! Seeded scenario generators (tabletop workstation clouds, rotating-table
//! streams) with ground truth, and the metrics used to score pipelines on them.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::{PointCloud, SceneSegmentation};
use crate::geometry::{line_angle, Point3, Vector3};
use crate::tracking::io::{frames, DetectionRecord};
use crate::tracking::{estimate_motion, NnTracker, SortConfig, SortTracker, Track3D};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SimError> {
    Err(SimError::Invalid(msg.into()))
}

/// Label of table-top points in [`WorkstationTruth::labels`].
pub const TABLE_LABEL: i64 = 0;
/// Label of uniform outliers.
pub const OUTLIER_LABEL: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    /// Extent along x and y, meters.
    pub size: [f64; 2],
    pub height: f64,
    #[serde(default)]
    pub center: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Box { size: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
}

impl Shape {
    pub fn height(&self) -> f64 {
        match *self {
            Shape::Box { size } => size[2],
            Shape::Cylinder { height, .. } => height,
        }
    }
}

/// Object standing on the table at `position` (x, y), rotated by `yaw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub label: String,
    #[serde(flatten)]
    pub shape: Shape,
    pub position: [f64; 2],
    #[serde(default)]
    pub yaw: f64,
}

fn default_density() -> f64 {
    1e4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkstationScenario {
    pub table: TableSpec,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub outlier_count: usize,
    /// Surface samples per square meter.
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default)]
    pub seed: u64,
}

impl WorkstationScenario {
    pub fn validate(&self) -> Result<(), SimError> {
        let t = &self.table;
        if !(t.size[0] > 0.0 && t.size[1] > 0.0) {
            return invalid("table size must be positive");
        }
        if !t.height.is_finite() || !t.center.iter().all(|c| c.is_finite()) {
            return invalid("table height and center must be finite");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return invalid("noise_sigma must be finite and non-negative");
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return invalid("density must be positive");
        }
        let (lo, hi) = self.table_bounds();
        for o in &self.objects {
            let ok = match o.shape {
                Shape::Box { size } => size.iter().all(|&s| s > 0.0),
                Shape::Cylinder { radius, height } => radius > 0.0 && height > 0.0,
            };
            if !ok {
                return invalid(format!("object `{}` has non-positive dimensions", o.label));
            }
            let inside =
                footprint(o).iter().all(|p| (lo[0]..=hi[0]).contains(&p[0]) && (lo[1]..=hi[1]).contains(&p[1]));
            if !inside {
                return invalid(format!("object `{}` is not on the table surface", o.label));
            }
        }
        Ok(())
    }

    fn table_bounds(&self) -> ([f64; 2], [f64; 2]) {
        let t = &self.table;
        let lo = [t.center[0] - t.size[0] / 2.0, t.center[1] - t.size[1] / 2.0];
        let hi = [t.center[0] + t.size[0] / 2.0, t.center[1] + t.size[1] / 2.0];
        (lo, hi)
    }
}

/// Points bounding the object's footprint: box corners, or the
/// axis-aligned square around a cylinder.
fn footprint(o: &ObjectSpec) -> Vec<[f64; 2]> {
    let [x, y] = o.position;
    match o.shape {
        Shape::Box { size } => {
            let (c, s) = (o.yaw.cos(), o.yaw.sin());
            [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                .iter()
                .map(|(a, b)| {
                    let (u, v) = (a * size[0] / 2.0, b * size[1] / 2.0);
                    [x + c * u - s * v, y + s * u + c * v]
                })
                .collect()
        }
        Shape::Cylinder { radius, .. } => {
            vec![[x - radius, y - radius], [x + radius, y + radius], [x - radius, y + radius], [x + radius, y - radius]]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneTruth {
    pub normal: [f64; 3],
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    /// Value used for this object in the per-point labels.
    pub id: i64,
    pub label: String,
    pub center: [f64; 3],
    pub yaw: f64,
    #[serde(flatten)]
    pub shape: Shape,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkstationTruth {
    pub plane: PlaneTruth,
    pub objects: Vec<ObjectTruth>,
    /// Per point: [`TABLE_LABEL`], [`OUTLIER_LABEL`] or an object id (1-based).
    pub labels: Vec<i64>,
}

impl WorkstationTruth {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("truth serializes")
    }
}

/// Number of samples on a surface of `area` square meters.
pub fn sample_count(area: f64, density: f64) -> usize {
    (area * density).round() as usize
}

/// Number of surface samples the generator puts on an object.
pub fn object_sample_count(shape: &Shape, density: f64) -> usize {
    surfaces(shape).iter().map(|s| sample_count(s.area(), density)).sum()
}

/// Visible surfaces in object coordinates (origin at the bottom center).
#[derive(Debug, Clone, Copy)]
enum Surface {
    /// Rectangle `center + a·u + b·v`, `a ∈ [-hu, hu]`, `b ∈ [-hv, hv]`.
    Rect {
        center: [f64; 3],
        u: [f64; 3],
        v: [f64; 3],
        hu: f64,
        hv: f64,
    },
    Disk {
        z: f64,
        r: f64,
    },
    Tube {
        r: f64,
        h: f64,
    },
}

impl Surface {
    fn area(&self) -> f64 {
        match *self {
            Surface::Rect { hu, hv, .. } => 4.0 * hu * hv,
            Surface::Disk { r, .. } => std::f64::consts::PI * r * r,
            Surface::Tube { r, h } => TAU * r * h,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 3] {
        match *self {
            Surface::Rect { center, u, v, hu, hv } => {
                let a = rng.random_range(-hu..=hu);
                let b = rng.random_range(-hv..=hv);
                [0, 1, 2].map(|i| center[i] + a * u[i] + b * v[i])
            }
            Surface::Disk { z, r } => {
                let rho = r * rng.random::<f64>().sqrt();
                let phi = rng.random_range(0.0..TAU);
                [rho * phi.cos(), rho * phi.sin(), z]
            }
            Surface::Tube { r, h } => {
                let phi = rng.random_range(0.0..TAU);
                [r * phi.cos(), r * phi.sin(), rng.random_range(0.0..=h)]
            }
        }
    }
}

fn surfaces(shape: &Shape) -> Vec<Surface> {
    match *shape {
        Shape::Box { size: [sx, sy, sz] } => {
            let (x, y, z) = ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
            let rect = |center, u, v, hu, hv| Surface::Rect { center, u, v, hu, hv };
            vec![
                rect([0.0, 0.0, sz], x, y, sx / 2.0, sy / 2.0),
                rect([sx / 2.0, 0.0, sz / 2.0], y, z, sy / 2.0, sz / 2.0),
                rect([-sx / 2.0, 0.0, sz / 2.0], y, z, sy / 2.0, sz / 2.0),
                rect([0.0, sy / 2.0, sz / 2.0], x, z, sx / 2.0, sz / 2.0),
                rect([0.0, -sy / 2.0, sz / 2.0], x, z, sx / 2.0, sz / 2.0),
            ]
        }
        Shape::Cylinder { radius, height } => {
            vec![Surface::Disk { z: height, r: radius }, Surface::Tube { r: radius, h: height }]
        }
    }
}

/// Samples the table top and the visible object surfaces at the scenario
/// density, adds isotropic Gaussian noise, then appends uniform outliers in a
/// box spanning the table and 0.2 m below to 0.5 m above it. Points are
/// ordered table, objects, outliers.
pub fn gen_workstation(s: &WorkstationScenario) -> Result<(PointCloud, WorkstationTruth), SimError> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let noise = Normal::new(0.0, s.noise_sigma).expect("sigma validated");
    let h = s.table.height;
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    let mut push = |rng: &mut ChaCha8Rng, p: [f64; 3], label: i64, pts: &mut Vec<Point3>| {
        let n: [f64; 3] = [noise.sample(rng), noise.sample(rng), noise.sample(rng)];
        pts.push(Point3::new(p[0] + n[0], p[1] + n[1], p[2] + n[2]));
        labels.push(label);
    };

    let table = Surface::Rect {
        center: [s.table.center[0], s.table.center[1], h],
        u: [1.0, 0.0, 0.0],
        v: [0.0, 1.0, 0.0],
        hu: s.table.size[0] / 2.0,
        hv: s.table.size[1] / 2.0,
    };
    for _ in 0..sample_count(table.area(), s.density) {
        let p = table.sample(&mut rng);
        push(&mut rng, p, TABLE_LABEL, &mut pts);
    }

    let mut objects = Vec::with_capacity(s.objects.len());
    for (k, o) in s.objects.iter().enumerate() {
        let id = k as i64 + 1;
        let (c, sn) = (o.yaw.cos(), o.yaw.sin());
        let mut count = 0;
        for surf in surfaces(&o.shape) {
            for _ in 0..sample_count(surf.area(), s.density) {
                let [x, y, z] = surf.sample(&mut rng);
                let p = [o.position[0] + c * x - sn * y, o.position[1] + sn * x + c * y, h + z];
                push(&mut rng, p, id, &mut pts);
                count += 1;
            }
        }
        objects.push(ObjectTruth {
            id,
            label: o.label.clone(),
            center: [o.position[0], o.position[1], h + o.shape.height() / 2.0],
            yaw: o.yaw,
            shape: o.shape.clone(),
            points: count,
        });
    }

    let (lo, hi) = s.table_bounds();
    for _ in 0..s.outlier_count {
        pts.push(Point3::new(
            rng.random_range(lo[0]..=hi[0]),
            rng.random_range(lo[1]..=hi[1]),
            rng.random_range(h - 0.2..=h + 0.5),
        ));
        labels.push(OUTLIER_LABEL);
    }
    let cloud = PointCloud::new(pts, "world").expect("generated points are finite");
    let truth = WorkstationTruth { plane: PlaneTruth { normal: [0.0, 0.0, 1.0], offset: -h }, objects, labels };
    Ok((cloud, truth))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RttObject {
    pub label: String,
    /// Angle at `t = 0`, radians.
    pub angle: f64,
}

fn default_px_per_m() -> f64 {
    500.0
}

fn default_object_size() -> [f64; 2] {
    [0.08, 0.06]
}

fn default_table_height() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RttScenario {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default = "default_table_height")]
    pub height: f64,
    /// Signed angular velocity, rad/s.
    pub omega: f64,
    pub objects: Vec<RttObject>,
    /// Frames per second.
    pub rate: f64,
    /// Seconds.
    pub duration: f64,
    /// Gaussian noise on the 3D points, meters.
    #[serde(default)]
    pub noise_m: f64,
    /// Gaussian noise on the 2D box centers, pixels.
    #[serde(default)]
    pub noise_px: f64,
    /// Probability that an object is missing from a frame.
    #[serde(default)]
    pub dropout: f64,
    #[serde(default = "default_px_per_m")]
    pub px_per_m: f64,
    /// Footprint of each object (x, y), meters; sets the 2D box size.
    #[serde(default = "default_object_size")]
    pub object_size: [f64; 2],
    #[serde(default)]
    pub seed: u64,
}

impl RttScenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.radius > 0.0) {
            return invalid("radius must be positive");
        }
        if !(self.rate > 0.0) {
            return invalid("rate must be positive");
        }
        if !(self.duration >= 0.0) {
            return invalid("duration must be non-negative");
        }
        if !(self.noise_m >= 0.0 && self.noise_px >= 0.0) {
            return invalid("noise must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.dropout) {
            return invalid("dropout must be in [0, 1]");
        }
        if !(self.px_per_m > 0.0 && self.object_size.iter().all(|&s| s > 0.0)) {
            return invalid("px_per_m and object_size must be positive");
        }
        let finite = [self.center[0], self.center[1], self.height, self.omega].iter().all(|v| v.is_finite())
            && self.objects.iter().all(|o| o.angle.is_finite());
        if !finite {
            return invalid("center, height, omega and angles must be finite");
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.rate).floor() as usize + 1
    }

    /// Orthographic top-down projection: `u = s·x`, `v = -s·y`.
    pub fn project(&self, x: f64, y: f64) -> [f64; 2] {
        [self.px_per_m * x, -self.px_per_m * y]
    }

    pub fn unproject(&self, u: f64, v: f64) -> [f64; 2] {
        [u / self.px_per_m, -v / self.px_per_m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub gt_id: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub t: f64,
    pub gt_id: i64,
    pub x: f64,
    pub y: f64,
    /// Unwrapped angle on the table circle.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RttStream {
    pub points: Vec<PointRecord>,
    pub detections: Vec<DetectionRecord>,
    pub truth: Vec<TruthRecord>,
}

/// JSON Lines, one record per line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(s, "{}", serde_json::to_string(r).expect("records serialize"));
    }
    s
}

/// Objects ride the circle at `θ_k(t) = θ_k(0) + ω·t`, sampled at
/// `t = i / rate` for `i < frame_count()`. Each (frame, object) pair is
/// dropped with probability `dropout` from both the point and detection
/// streams; ground truth is always recorded.
pub fn gen_rtt_stream(s: &RttScenario) -> Result<RttStream, SimError> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let nm = Normal::new(0.0, s.noise_m).expect("validated");
    let np = Normal::new(0.0, s.noise_px).expect("validated");
    let (bw, bh) = (s.object_size[0] * s.px_per_m, s.object_size[1] * s.px_per_m);
    let mut out = RttStream { points: Vec::new(), detections: Vec::new(), truth: Vec::new() };
    for i in 0..s.frame_count() {
        let t = i as f64 / s.rate;
        for (k, o) in s.objects.iter().enumerate() {
            let gt_id = k as i64;
            let angle = o.angle + s.omega * t;
            let x = s.center[0] + s.radius * angle.cos();
            let y = s.center[1] + s.radius * angle.sin();
            out.truth.push(TruthRecord { t, gt_id, x, y, angle });
            let dropped = rng.random::<f64>() < s.dropout;
            let e = [nm.sample(&mut rng), nm.sample(&mut rng), nm.sample(&mut rng)];
            let ep = [np.sample(&mut rng), np.sample(&mut rng)];
            if dropped {
                continue;
            }
            out.points.push(PointRecord { t, x: x + e[0], y: y + e[1], z: s.height + e[2], gt_id });
            let [u, v] = s.project(x, y);
            out.detections.push(DetectionRecord {
                t,
                cx: u + ep[0],
                cy: v + ep[1],
                w: bw,
                h: bh,
                score: 1.0,
                gt_id: Some(gt_id),
            });
        }
    }
    Ok(out)
}

/// Named scalar results of a pipeline run; every value is finite.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MetricsReport(BTreeMap<String, f64>);

impl MetricsReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Non-finite values are rejected.
    pub fn set(&mut self, name: impl Into<String>, value: f64) -> Result<(), SimError> {
        let name = name.into();
        if !value.is_finite() {
            return invalid(format!("metric `{name}` is not finite"));
        }
        self.0.insert(name, value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.0).expect("finite floats serialize")
    }

    /// `metric,value` rows in name order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,value\n");
        for (k, v) in &self.0 {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }
}

/// One tracker decision: the track id given to a detection of `gt_id` in `frame`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    pub frame: usize,
    pub gt_id: i64,
    pub track_id: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdMetrics {
    /// Changes of track id between consecutive detections of the same object.
    pub id_switches: usize,
    /// Frames in which every detection carries its object's dominant track id.
    pub frames_correct: usize,
    pub frames: usize,
    /// Most frequent track id per object (ties to the smaller id).
    pub dominant: BTreeMap<i64, u64>,
}

impl IdMetrics {
    pub fn correct_fraction(&self) -> f64 {
        if self.frames == 0 {
            1.0
        } else {
            self.frames_correct as f64 / self.frames as f64
        }
    }
}

/// Assignments must be in frame order.
pub fn id_metrics(assignments: &[Assignment]) -> IdMetrics {
    let mut last: BTreeMap<i64, u64> = BTreeMap::new();
    let mut counts: BTreeMap<i64, BTreeMap<u64, usize>> = BTreeMap::new();
    let mut id_switches = 0;
    for a in assignments {
        if let Some(prev) = last.insert(a.gt_id, a.track_id) {
            if prev != a.track_id {
                id_switches += 1;
            }
        }
        *counts.entry(a.gt_id).or_default().entry(a.track_id).or_default() += 1;
    }
    let dominant: BTreeMap<i64, u64> = counts
        .iter()
        .map(|(&g, c)| {
            let best = c.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&id, _)| id).expect("non-empty");
            (g, best)
        })
        .collect();
    let mut frame_ok: BTreeMap<usize, bool> = BTreeMap::new();
    for a in assignments {
        let ok = dominant[&a.gt_id] == a.track_id;
        frame_ok.entry(a.frame).and_modify(|f| *f &= ok).or_insert(ok);
    }
    IdMetrics {
        id_switches,
        frames_correct: frame_ok.values().filter(|&&ok| ok).count(),
        frames: frame_ok.len(),
        dominant,
    }
}

/// Scores a segmentation against generator truth. Cluster indices are mapped
/// back to raw points through `seg.sources`.
pub fn perception_metrics(seg: &SceneSegmentation, truth: &WorkstationTruth) -> MetricsReport {
    let n = Vector3::from(truth.plane.normal);
    let normal_err = line_angle(&seg.plane.normal, &n).to_degrees();
    // compare offsets with both normals facing the same way
    let offset = if seg.plane.normal.dot(&n) >= 0.0 { seg.plane.offset } else { -seg.plane.offset };
    let (mut majority, mut total) = (0usize, 0usize);
    for c in &seg.clusters {
        let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
        for &i in &c.indices {
            for &raw in &seg.sources[i] {
                *hist.entry(truth.labels[raw]).or_default() += 1;
                total += 1;
            }
        }
        majority += hist.values().max().copied().unwrap_or(0);
    }
    let mut m = MetricsReport::new();
    let set = |m: &mut MetricsReport, k: &str, v: f64| m.set(k, v).expect("finite by construction");
    set(&mut m, "plane_normal_err_deg", normal_err);
    set(&mut m, "plane_offset_err", (offset - truth.plane.offset).abs());
    set(&mut m, "object_count", seg.clusters.len() as f64);
    set(&mut m, "true_object_count", truth.objects.len() as f64);
    set(&mut m, "cluster_purity", if total == 0 { 1.0 } else { majority as f64 / total as f64 });
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TrackerKind {
    /// SORT on the 2D detection stream.
    Sort,
    /// Nearest-neighbour association on the 3D point stream.
    Nn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NnParams {
    pub gate: f64,
    pub max_gap: f64,
}

impl Default for NnParams {
    fn default() -> Self {
        NnParams { gate: 0.05, max_gap: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RttEvaluation {
    pub ids: IdMetrics,
    /// Track histories in table coordinates, keyed by track id.
    pub tracks: BTreeMap<u64, Track3D>,
    /// Estimated angular velocity per object, from its dominant track.
    pub omega: BTreeMap<i64, f64>,
    pub metrics: MetricsReport,
}

/// Runs a tracker over a generated stream and scores id consistency and the
/// angular velocity recovered from each object's dominant track. SORT tracks
/// are lifted back to the table plane through the inverse projection.
pub fn evaluate_rtt(
    s: &RttScenario,
    stream: &RttStream,
    tracker: TrackerKind,
    sort: &SortConfig,
    nn: &NnParams,
) -> Result<RttEvaluation, SimError> {
    let frame_of = |t: f64| (t * s.rate).round() as usize;
    let mut assignments = Vec::new();
    let mut tracks: BTreeMap<u64, Track3D> = BTreeMap::new();
    let mut record = |t: f64, gt: i64, id: u64, p: Point3, assignments: &mut Vec<Assignment>| {
        assignments.push(Assignment { frame: frame_of(t), gt_id: gt, track_id: id });
        tracks.entry(id).or_insert_with(|| Track3D { id, history: Vec::new() }).history.push((t, p));
    };
    match tracker {
        TrackerKind::Sort => {
            let mut tr = SortTracker::new(SortConfig { dt: 1.0 / s.rate, ..*sort });
            for (t, recs) in frames(&stream.detections) {
                let dets: Vec<_> = recs.iter().map(DetectionRecord::detection).collect();
                let step = tr.step(&dets);
                for (r, id) in recs.iter().zip(step.detection_ids) {
                    let [x, y] = s.unproject(r.cx, r.cy);
                    record(t, r.gt_id.unwrap_or(-1), id, Point3::new(x, y, s.height), &mut assignments);
                }
            }
        }
        TrackerKind::Nn => {
            let mut tr = NnTracker::new(nn.gate, nn.max_gap);
            let mut i = 0;
            while i < stream.points.len() {
                let t = stream.points[i].t;
                let j = i + stream.points[i..].iter().take_while(|p| p.t == t).count();
                let frame = &stream.points[i..j];
                let pts: Vec<Point3> = frame.iter().map(|p| Point3::new(p.x, p.y, p.z)).collect();
                let ids = tr.step(t, &pts).map_err(|e| SimError::Invalid(e.to_string()))?;
                for ((p, q), id) in frame.iter().zip(pts).zip(ids) {
                    record(t, p.gt_id, id, q, &mut assignments);
                }
                i = j;
            }
        }
    }
    let ids = id_metrics(&assignments);
    let mut omega = BTreeMap::new();
    for (&gt, id) in &ids.dominant {
        if let Ok(m) = estimate_motion(&tracks[id], None) {
            omega.insert(gt, m.omega);
        }
    }
    let mut metrics = MetricsReport::new();
    let set = |m: &mut MetricsReport, k: &str, v: f64| m.set(k, v);
    set(&mut metrics, "frames", s.frame_count() as f64)?;
    set(&mut metrics, "detections", assignments.len() as f64)?;
    set(&mut metrics, "tracks", tracks.len() as f64)?;
    set(&mut metrics, "id_switches", ids.id_switches as f64)?;
    set(&mut metrics, "frames_correct_frac", ids.correct_fraction())?;
    set(&mut metrics, "omega_true", s.omega)?;
    if !omega.is_empty() {
        // relative to |ω|, or absolute for a stationary table
        let scale = if s.omega == 0.0 { 1.0 } else { s.omega.abs() };
        let errs: Vec<f64> = omega.values().map(|w| (w - s.omega).abs() / scale).collect();
        set(&mut metrics, "omega_err_max", errs.iter().copied().fold(0.0, f64::max))?;
        set(&mut metrics, "omega_err_mean", errs.iter().sum::<f64>() / errs.len() as f64)?;
    }
    Ok(RttEvaluation { ids, tracks, omega, metrics })
}
