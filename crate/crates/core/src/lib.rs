//! Perception, tracking, manipulation, navigation and task planning for a
//! mobile manipulator, plus the deterministic scenario generators and CLI
//! used to exercise them end to end.

// `!(x > 0.0)` is the NaN-rejecting form used for input validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cloud;
pub mod execution;
pub mod geometry;
pub mod grasp;
pub mod nav;
pub mod parallel;
pub mod placement;
pub mod planning;
pub mod recognition;
pub mod sim;
pub mod spatial;
pub mod tracking;

pub use parallel::Execution;
