use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use super::chain::{fk, jacobian, JointConfig, KinematicChain};
use super::{GraspError, Result};
use crate::geometry::{Pose, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IkConfig {
    pub tol_pos: f64,
    pub tol_ang: f64,
    pub max_iters: usize,
    pub lambda: f64,
    /// Orientation error weights about the end-effector x, y, z axes.
    pub orient_weights: [f64; 3],
    /// Largest joint-space step per iteration (radians, Euclidean norm).
    pub max_step: f64,
    pub fd_step: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        IkConfig {
            tol_pos: 1e-3,
            tol_ang: 0.5f64.to_radians(),
            max_iters: 200,
            lambda: 0.02,
            orient_weights: [1.0, 1.0, 0.2],
            max_step: 0.3,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IkSolution {
    pub q: JointConfig,
    /// Number of joint updates applied.
    pub iterations: usize,
    pub pos_err: f64,
    pub ang_err: f64,
}

/// Position error (world) and weighted orientation error (end-effector frame).
pub fn pose_error(current: &Pose, target: &Pose, weights: &[f64; 3]) -> (Vector3, Vector3) {
    let dp = target.translation.vector - current.translation.vector;
    let rot_world = (target.rotation * current.rotation.inverse()).scaled_axis();
    let rot_ee = current.rotation.inverse() * rot_world;
    (dp, rot_ee.component_mul(&Vector3::from(*weights)))
}

/// Damped least squares on the 6D pose error with a finite-difference
/// Jacobian; every iterate is clamped into the joint limits.
pub fn ik_dls(chain: &KinematicChain, target: &Pose, q0: &JointConfig, cfg: &IkConfig) -> Result<IkSolution> {
    let w = Vector3::from(cfg.orient_weights);
    let mut q = chain.clamp(q0);
    let mut best = (f64::INFINITY, f64::INFINITY);
    for it in 0..=cfg.max_iters {
        let cur = fk(chain, &q);
        let (dp, dr) = pose_error(&cur, target, &cfg.orient_weights);
        let (pos_err, ang_err) = (dp.norm(), dr.norm());
        if pos_err + ang_err < best.0 + best.1 {
            best = (pos_err, ang_err);
        }
        if pos_err <= cfg.tol_pos && ang_err <= cfg.tol_ang {
            return Ok(IkSolution { q, iterations: it, pos_err, ang_err });
        }
        if it == cfg.max_iters {
            break;
        }
        let mut jac = jacobian(chain, &q, cfg.fd_step);
        let rinv = cur.rotation.inverse().to_rotation_matrix();
        for c in 0..jac.ncols() {
            let ang: Vector3 = jac.fixed_view::<3, 1>(3, c).into_owned();
            let ee = (rinv * ang).component_mul(&w);
            jac.fixed_view_mut::<3, 1>(3, c).copy_from(&ee);
        }
        let e = Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z);
        let damped = jac * jac.transpose() + Matrix6::identity() * cfg.lambda * cfg.lambda;
        let Some(inv) = damped.try_inverse() else { break };
        let mut step = jac.transpose() * (inv * e);
        let n = step.norm();
        if n > cfg.max_step {
            step *= cfg.max_step / n;
        }
        let mut next = q;
        for i in 0..next.0.len() {
            next.0[i] += step[i];
        }
        q = chain.clamp(&next);
    }
    Err(GraspError::NoConvergence { pos_err: best.0, ang_err: best.1 })
}
