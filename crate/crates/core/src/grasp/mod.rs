//! Arm kinematics and the pre-grasp planner: approach selection, pose
//! sampling around the object, first-fit reachability and grasp monitoring.

mod chain;
mod ik;
mod monitor;
mod planner;

use thiserror::Error;

pub use chain::{fk, jacobian, DhJoint, JointConfig, KinematicChain, DOF, EXAMPLE_CHAIN_JSON, EXAMPLE_READY};
pub use ik::{ik_dls, pose_error, IkConfig, IkSolution};
pub use monitor::{grasp_monitor, FingerModel, GraspMonitorConfig, GraspState, GripperFeedback};
pub use planner::{decide_approach, sample_pregrasp, select_reachable, Approach, GraspCandidate, GraspConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraspError {
    #[error("chain must have exactly {DOF} joints, got {0}")]
    WrongJointCount(usize),
    #[error("joint {0} has lo >= hi")]
    BadLimits(usize),
    #[error("IK did not converge (best position error {pos_err} m, orientation error {ang_err} rad)")]
    NoConvergence { pos_err: f64, ang_err: f64 },
    #[error("no candidate pose is reachable")]
    NoReachableCandidate,
    #[error("invalid chain file: {0}")]
    ChainFile(String),
}

pub type Result<T> = std::result::Result<T, GraspError>;
