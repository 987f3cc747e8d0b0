//! Shared geometric types and small helpers.

use nalgebra::{Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
/// Position + unit-quaternion orientation.
pub type Pose = Isometry3<f64>;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    PI - (PI - a).rem_euclid(TAU)
}

/// Angle between two lines through the origin, in `[0, pi/2]`.
pub fn line_angle(a: &Vector3, b: &Vector3) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).abs().min(1.0);
    c.acos()
}

/// Flips `v` so its first significant component (z, then x, then y) is positive.
pub fn canonical_up(v: Vector3) -> Vector3 {
    for i in [2, 0, 1] {
        if v[i].abs() > 1e-12 {
            return if v[i] < 0.0 { -v } else { v };
        }
    }
    v
}

/// Flips `v` so its first significant component (x, then y, then z) is positive.
pub fn canonical_forward(v: Vector3) -> Vector3 {
    for i in 0..3 {
        if v[i].abs() > 1e-12 {
            return if v[i] < 0.0 { -v } else { v };
        }
    }
    v
}

/// Rotation whose columns are `x`, `z × x` and `z`. `x` is orthogonalized
/// against `z` first; both are assumed non-parallel.
pub fn frame_from_z_x(z: &Vector3, x_hint: &Vector3) -> UnitQuaternion<f64> {
    let z = z.normalize();
    let x = (x_hint - z * z.dot(x_hint)).normalize();
    let y = z.cross(&x);
    let m = Matrix3::from_columns(&[x, y, z]);
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}

pub fn pose_from_parts(p: Point3, q: UnitQuaternion<f64>) -> Pose {
    Isometry3::from_parts(Translation3::from(p.coords), q)
}

/// JSON form of a pose: `{"position": [x, y, z], "orientation": [qx, qy, qz, qw]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseJson {
    pub position: [f64; 3],
    pub orientation: [f64; 4],
}

impl From<&Pose> for PoseJson {
    fn from(p: &Pose) -> Self {
        let t = p.translation.vector;
        let q = p.rotation.quaternion();
        PoseJson { position: [t.x, t.y, t.z], orientation: [q.i, q.j, q.k, q.w] }
    }
}

impl From<PoseJson> for Pose {
    fn from(p: PoseJson) -> Self {
        let [x, y, z, w] = p.orientation;
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(w, x, y, z));
        pose_from_parts(Point3::new(p.position[0], p.position[1], p.position[2]), q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn frame_columns() {
        let q = frame_from_z_x(&Vector3::new(0.0, 0.0, -1.0), &Vector3::x());
        let r = q.to_rotation_matrix();
        assert!((r.matrix().column(2) - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        assert!((r.matrix().column(0) - Vector3::x()).norm() < 1e-12);
        assert!((r.matrix().determinant() - 1.0).abs() < 1e-12);
    }
}
