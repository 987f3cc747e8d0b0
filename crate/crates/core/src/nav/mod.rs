//! Omni-directional Dynamic Window Approach over an occupancy grid.

mod dwa;
mod grid;

use thiserror::Error;

pub use dwa::{
    clearance, dwa_step, dynamic_window, rollout, run_episode, write_pose_log, DwaConfig, Episode, EpisodeOutcome,
    RobotState, VelocityCommand, Window,
};
pub use grid::{Cell, GridMeta, OccupancyGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("trajectory leaves the map")]
    TrajectoryLeavesMap,
    #[error("every sampled velocity collides")]
    NoAdmissibleVelocity,
    #[error("PGM: {0}")]
    Pgm(String),
    #[error("invalid navigation input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, NavError>;
