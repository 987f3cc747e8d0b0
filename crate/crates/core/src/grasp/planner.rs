use nalgebra::{UnitQuaternion, Vector2};
use serde::{Deserialize, Serialize};

use super::chain::{JointConfig, KinematicChain};
use super::ik::{ik_dls, IkConfig, IkSolution};
use super::{GraspError, Result};
use crate::geometry::{frame_from_z_x, pose_from_parts, Point3, Pose, PoseJson, Vector3};
use crate::parallel::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    Top,
    Frontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraspConfig {
    /// Objects taller than this are grasped from the front.
    pub vertical_threshold: f64,
    pub offset: f64,
    pub yaw_spread: f64,
    pub samples: usize,
    /// Distance the base keeps from a tall object before a frontal grasp.
    pub frontal_standoff: f64,
    pub ik: IkConfig,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig {
            vertical_threshold: 0.06,
            offset: 0.05,
            yaw_spread: std::f64::consts::FRAC_PI_2,
            samples: 9,
            frontal_standoff: 0.25,
            ik: IkConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspCandidate {
    pub pregrasp_pose: Pose,
    pub approach: Approach,
    pub offset: f64,
    pub yaw: f64,
    pub score: f64,
}

impl Serialize for GraspCandidate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            pregrasp_pose: PoseJson,
            approach: Approach,
            offset: f64,
            yaw: f64,
            score: f64,
        }
        Repr {
            pregrasp_pose: (&self.pregrasp_pose).into(),
            approach: self.approach,
            offset: self.offset,
            yaw: self.yaw,
            score: self.score,
        }
        .serialize(s)
    }
}

pub fn decide_approach(object_height: f64, threshold: f64) -> Approach {
    if object_height > threshold {
        Approach::Frontal
    } else {
        Approach::Top
    }
}

/// Yaw offsets evenly spread over `[-spread/2, spread/2]` (endpoints
/// included), ordered by magnitude with negative first on ties.
fn yaw_samples(n: usize, spread: f64) -> Vec<f64> {
    let mut v: Vec<f64> =
        if n == 1 { vec![0.0] } else { (0..n).map(|i| -spread / 2.0 + spread * i as f64 / (n - 1) as f64).collect() };
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    v
}

/// Candidate pre-grasp poses backed off by `offset` against the approach
/// direction. The tool z axis is the approach direction; top grasps point
/// down with tool x along the object's horizontal major axis, frontal grasps
/// approach horizontally from `arm_base` with tool x up.
pub fn sample_pregrasp(
    object_pose: &Pose,
    approach: Approach,
    offset: f64,
    n: usize,
    yaw_spread: f64,
    arm_base: &Point3,
) -> Vec<GraspCandidate> {
    let obj = Point3::from(object_pose.translation.vector);
    let (dir, x_hint) = match approach {
        Approach::Top => {
            let major = object_pose.rotation * Vector3::x();
            let flat = Vector3::new(major.x, major.y, 0.0);
            let hint = if flat.norm() > 1e-6 { flat } else { Vector3::x() };
            (Vector3::new(0.0, 0.0, -1.0), hint)
        }
        Approach::Frontal => {
            let d = Vector2::new(obj.x - arm_base.x, obj.y - arm_base.y);
            let d = if d.norm() > 1e-9 { d.normalize() } else { Vector2::x() };
            (Vector3::new(d.x, d.y, 0.0), Vector3::z())
        }
    };
    let nominal = frame_from_z_x(&dir, &x_hint);
    let position = obj - dir * offset;
    yaw_samples(n.max(1), yaw_spread)
        .into_iter()
        .map(|yaw| {
            let rot = nominal * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw);
            GraspCandidate {
                pregrasp_pose: pose_from_parts(position, rot),
                approach,
                offset,
                yaw,
                score: 1.0 - yaw.abs() / std::f64::consts::PI,
            }
        })
        .collect()
}

/// First candidate, in the given order, for which IK succeeds.
pub fn select_reachable(
    chain: &KinematicChain,
    candidates: &[GraspCandidate],
    q0: &JointConfig,
    ik: &IkConfig,
    exec: Execution,
) -> Result<(GraspCandidate, IkSolution)> {
    exec.find_map_first(candidates, |_, c| ik_dls(chain, &c.pregrasp_pose, q0, ik).ok().map(|s| (c.clone(), s)))
        .ok_or(GraspError::NoReachableCandidate)
}
