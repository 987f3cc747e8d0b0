use nalgebra::{Isometry3, Matrix6x5, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::{GraspError, Result};
use crate::geometry::{Pose, Vector3};

pub const DOF: usize = 5;

/// Shipped example arm: yaw, three pitch joints and a wrist roll; the link
/// lengths (including the base column and tool) add up to 0.65 m.
pub const EXAMPLE_CHAIN_JSON: &str = include_str!("../../data/chain_5dof.json");

/// Standard Denavit–Hartenberg row of a revolute joint with its limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhJoint {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta_offset: f64,
    pub lo: f64,
    pub hi: f64,
}

impl DhJoint {
    fn transform(&self, q: f64) -> Isometry3<f64> {
        let rz = Isometry3::from_parts(
            Translation3::new(0.0, 0.0, self.d),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), q + self.theta_offset),
        );
        let rx = Isometry3::from_parts(
            Translation3::new(self.a, 0.0, 0.0),
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), self.alpha),
        );
        rz * rx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain {
    joints: [DhJoint; DOF],
    pub base: Pose,
}

impl KinematicChain {
    pub fn new(joints: Vec<DhJoint>, base: Pose) -> Result<Self> {
        let n = joints.len();
        let joints: [DhJoint; DOF] = joints.try_into().map_err(|_| GraspError::WrongJointCount(n))?;
        if let Some(i) = joints.iter().position(|j| !(j.lo < j.hi)) {
            return Err(GraspError::BadLimits(i));
        }
        Ok(KinematicChain { joints, base })
    }

    /// Parses the chain file format: a JSON array of DH rows with limits.
    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<DhJoint> = serde_json::from_str(text).map_err(|e| GraspError::ChainFile(e.to_string()))?;
        Self::new(rows, Pose::identity())
    }

    pub fn example() -> Self {
        Self::from_json(EXAMPLE_CHAIN_JSON).expect("bundled chain is valid")
    }

    pub fn joints(&self) -> &[DhJoint; DOF] {
        &self.joints
    }

    pub fn clamp(&self, q: &JointConfig) -> JointConfig {
        JointConfig(std::array::from_fn(|i| q.0[i].clamp(self.joints[i].lo, self.joints[i].hi)))
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        q.0.iter().zip(&self.joints).all(|(v, j)| *v >= j.lo && *v <= j.hi)
    }

    /// Midpoint of every joint range.
    pub fn home(&self) -> JointConfig {
        JointConfig(std::array::from_fn(|i| 0.5 * (self.joints[i].lo + self.joints[i].hi)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointConfig(pub [f64; DOF]);

/// Bundled arm bent over with the tool pointing down, about 0.25 m in front
/// of the base. Tabletop IK converges far more often from here than from the
/// nearly upright [`KinematicChain::home`].
pub const EXAMPLE_READY: JointConfig = JointConfig([0.0, -0.56, -0.83, -1.75, 0.0]);

/// End-effector pose: base followed by the product of the joint transforms.
pub fn fk(chain: &KinematicChain, q: &JointConfig) -> Pose {
    chain.joints.iter().zip(q.0).fold(chain.base, |acc, (j, qi)| acc * j.transform(qi))
}

/// Geometric Jacobian (linear velocity rows, then world angular velocity)
/// by central differences with step `h`.
pub fn jacobian(chain: &KinematicChain, q: &JointConfig, h: f64) -> Matrix6x5<f64> {
    let mut jac = Matrix6x5::zeros();
    for i in 0..DOF {
        let mut qp = *q;
        let mut qm = *q;
        qp.0[i] += h;
        qm.0[i] -= h;
        let (fp, fm) = (fk(chain, &qp), fk(chain, &qm));
        let dp = (fp.translation.vector - fm.translation.vector) / (2.0 * h);
        let dr = (fp.rotation * fm.rotation.inverse()).scaled_axis() / (2.0 * h);
        jac.fixed_view_mut::<3, 1>(0, i).copy_from(&dp);
        jac.fixed_view_mut::<3, 1>(3, i).copy_from(&dr);
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn planar() -> KinematicChain {
        let j = |a: f64| DhJoint { a, alpha: 0.0, d: 0.0, theta_offset: 0.0, lo: -3.0, hi: 3.0 };
        KinematicChain::new(vec![j(1.0), j(1.0), j(0.0), j(0.0), j(0.0)], Pose::identity()).unwrap()
    }

    #[test]
    fn planar_two_link() {
        let c = planar();
        let p = fk(&c, &JointConfig([0.0; 5])).translation.vector;
        assert!((p - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
        let p = fk(&c, &JointConfig([FRAC_PI_2, 0.0, 0.0, 0.0, 0.0])).translation.vector;
        assert!((p - Vector3::new(0.0, 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_chains() {
        let j = DhJoint { a: 0.1, alpha: 0.0, d: 0.0, theta_offset: 0.0, lo: -1.0, hi: 1.0 };
        assert_eq!(KinematicChain::new(vec![j; 4], Pose::identity()), Err(GraspError::WrongJointCount(4)));
        let mut js = vec![j; 5];
        js[2].lo = 2.0;
        assert_eq!(KinematicChain::new(js, Pose::identity()), Err(GraspError::BadLimits(2)));
        assert!(KinematicChain::from_json("[{\"a\": 1}]").is_err());
    }

    #[test]
    fn example_chain_reach() {
        let c = KinematicChain::example();
        let total: f64 = c.joints().iter().map(|j| j.a.abs() + j.d.abs()).sum();
        assert!((total - 0.65).abs() < 1e-12);
    }

    fn dh_matrix(j: &DhJoint, q: f64) -> Matrix4<f64> {
        let (st, ct) = (q + j.theta_offset).sin_cos();
        let (sa, ca) = j.alpha.sin_cos();
        Matrix4::new(
            ct,
            -st * ca,
            st * sa,
            j.a * ct,
            st,
            ct * ca,
            -ct * sa,
            j.a * st,
            0.0,
            sa,
            ca,
            j.d,
            0.0,
            0.0,
            0.0,
            1.0,
        )
    }

    proptest! {
        #[test]
        fn fk_matches_matrix_product(q in proptest::array::uniform5(-3.0f64..3.0)) {
            let c = KinematicChain::example();
            let mut m = c.base.to_homogeneous();
            for (j, qi) in c.joints().iter().zip(q) {
                m *= dh_matrix(j, qi);
            }
            let pose = fk(&c, &JointConfig(q));
            prop_assert!((pose.to_homogeneous() - m).abs().max() < 1e-9);
            prop_assert!((pose.rotation.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn central_jacobian_matches_forward_difference(q in proptest::array::uniform5(-2.5f64..2.5)) {
            let c = KinematicChain::example();
            let q = JointConfig(q);
            let central = jacobian(&c, &q, 1e-6);
            let h = 1e-7;
            let f0 = fk(&c, &q);
            for i in 0..DOF {
                let mut qp = q;
                qp.0[i] += h;
                let f1 = fk(&c, &qp);
                let dp = (f1.translation.vector - f0.translation.vector) / h;
                let dr = (f1.rotation * f0.rotation.inverse()).scaled_axis() / h;
                for r in 0..3 {
                    prop_assert!((central[(r, i)] - dp[r]).abs() < 1e-4);
                    prop_assert!((central[(r + 3, i)] - dr[r]).abs() < 1e-4);
                }
            }
        }
    }
}
