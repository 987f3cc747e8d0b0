//! Free-space placement on a support plane: a workstation model from a point
//! cloud, clearance-respecting pose sampling and reachability ranking.

use nalgebra::{Rotation3, UnitQuaternion, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::{segment_scene, CloudError, Plane, PointCloud, Polygon2, SceneConfig};
use crate::geometry::{pose_from_parts, Pose, PoseJson, Vector3};
use crate::grasp::{ik_dls, IkConfig, JointConfig, KinematicChain};
use crate::parallel::Execution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlacementError {
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error("no feasible placement found in {attempts} attempts")]
    NoFreeSpace { attempts: usize },
    #[error("no placement candidate is reachable")]
    NoReachablePlacement,
    #[error("invalid placement parameters: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, PlacementError>;

/// Disc over-approximation of an object's footprint in plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle2 {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementPose {
    /// On the plane, z along the plane normal, x along the basis u axis.
    pub pose: Pose,
    pub uv: [f64; 2],
    /// Smallest slack over the edge and obstacle constraints.
    pub clearance: f64,
    pub reach_score: f64,
}

impl Serialize for PlacementPose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            pose: PoseJson,
            uv: [f64; 2],
            clearance: f64,
            reach_score: f64,
        }
        Repr { pose: (&self.pose).into(), uv: self.uv, clearance: self.clearance, reach_score: self.reach_score }
            .serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlacementConfig {
    pub scene: SceneConfig,
    pub d_min: f64,
    pub footprint: f64,
    pub n: usize,
    pub max_attempts: usize,
    pub seed: u64,
    /// Height of the release pose above the placement point.
    pub release_height: f64,
    pub ik: IkConfig,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig {
            scene: SceneConfig::default(),
            d_min: 0.03,
            footprint: 0.05,
            n: 20,
            max_attempts: 10_000,
            seed: 0,
            release_height: 0.05,
            ik: IkConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkstationModel {
    pub plane: Plane,
    pub polygon: Polygon2,
    pub obstacles: Vec<Obstacle2>,
}

pub fn workstation_model(cloud: &PointCloud, cfg: &SceneConfig, exec: Execution) -> Result<WorkstationModel> {
    if cloud.is_empty() {
        return Err(CloudError::TooFewPoints { need: 1, have: 0 }.into());
    }
    let scene = segment_scene(cloud, cfg, exec)?;
    let basis = &scene.polygon.basis;
    let obstacles = scene
        .clusters
        .iter()
        .map(|c| {
            let center = basis.project(&c.centroid);
            let radius = c
                .indices
                .iter()
                .map(|&i| (basis.project(&scene.cloud.points()[i]) - center).norm())
                .fold(0.0, f64::max);
            Obstacle2 { center: [center.x, center.y], radius }
        })
        .collect();
    Ok(WorkstationModel { plane: scene.plane, polygon: scene.polygon, obstacles })
}

/// Slack of `p` against the edge and obstacle constraints; feasible iff the
/// point is inside the polygon and the slack is non-negative.
pub fn placement_margin(
    polygon: &Polygon2,
    obstacles: &[Obstacle2],
    d_min: f64,
    footprint: f64,
    p: &Vector2<f64>,
) -> f64 {
    let mut m = polygon.edge_distance(p) - footprint;
    for o in obstacles {
        let d = (p - Vector2::from(o.center)).norm();
        m = m.min(d - (o.radius + footprint + d_min));
    }
    m
}

fn placement_pose(polygon: &Polygon2, uv: &Vector2<f64>) -> Pose {
    let b = &polygon.basis;
    let rot = Rotation3::from_basis_unchecked(&[b.u, b.v, b.normal()]);
    pose_from_parts(b.lift(uv), UnitQuaternion::from_rotation_matrix(&rot))
}

/// Uniform rejection sampling over the polygon's bounding box. Attempts are
/// drawn from one seeded stream, so a fixed seed yields a fixed attempt
/// sequence regardless of the constraint parameters.
pub fn sample_placements(
    polygon: &Polygon2,
    obstacles: &[Obstacle2],
    d_min: f64,
    footprint: f64,
    n: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<Vec<PlacementPose>> {
    if !(d_min >= 0.0) || !(footprint >= 0.0) || n == 0 {
        return Err(PlacementError::Invalid(format!("d_min {d_min}, footprint {footprint}, n {n}")));
    }
    if polygon.vertices.len() < 3 {
        return Err(PlacementError::NoFreeSpace { attempts: 0 });
    }
    let (lo, hi) = polygon.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..max_attempts {
        let p = Vector2::new(lo.x + (hi.x - lo.x) * rng.random::<f64>(), lo.y + (hi.y - lo.y) * rng.random::<f64>());
        if !polygon.contains(&p) {
            continue;
        }
        let margin = placement_margin(polygon, obstacles, d_min, footprint, &p);
        if margin >= 0.0 {
            out.push(PlacementPose {
                pose: placement_pose(polygon, &p),
                uv: [p.x, p.y],
                clearance: margin,
                reach_score: 0.0,
            });
            if out.len() == n {
                break;
            }
        }
    }
    if out.is_empty() {
        return Err(PlacementError::NoFreeSpace { attempts: max_attempts });
    }
    Ok(out)
}

/// End-effector pose that releases an object at `placement`: raised along
/// the plane normal, tool z pointing into the plane.
pub fn release_pose(placement: &Pose, height: f64) -> Pose {
    let flip = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI);
    let up = placement.rotation * Vector3::z();
    pose_from_parts((placement.translation.vector + up * height).into(), placement.rotation * flip)
}

/// Scores each candidate by `1 / (1 + IK iterations)` (0 when IK fails) with
/// the arm mounted on a base at `base_pose`, then sorts by score, clearance
/// and `(u, v)`.
pub fn rank_placements(
    chain: &KinematicChain,
    base_pose: &Pose,
    candidates: &[PlacementPose],
    q0: &JointConfig,
    release_height: f64,
    ik: &IkConfig,
    exec: Execution,
) -> Result<Vec<PlacementPose>> {
    if candidates.is_empty() {
        return Err(PlacementError::Invalid("no candidates".into()));
    }
    let inv = base_pose.inverse();
    let scores = exec.map(candidates, |c| {
        let target = inv * release_pose(&c.pose, release_height);
        ik_dls(chain, &target, q0, ik).map_or(0.0, |s| 1.0 / (1.0 + s.iterations as f64))
    });
    let mut ranked: Vec<PlacementPose> =
        candidates.iter().zip(scores).map(|(c, s)| PlacementPose { reach_score: s, ..c.clone() }).collect();
    if ranked.iter().all(|c| c.reach_score == 0.0) {
        return Err(PlacementError::NoReachablePlacement);
    }
    ranked.sort_by(|a, b| {
        b.reach_score
            .total_cmp(&a.reach_score)
            .then(b.clearance.total_cmp(&a.clearance))
            .then(a.uv[0].total_cmp(&b.uv[0]))
            .then(a.uv[1].total_cmp(&b.uv[1]))
    });
    Ok(ranked)
}
