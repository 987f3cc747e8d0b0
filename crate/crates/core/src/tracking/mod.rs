//! Rotating-table tracking: 3D nearest-neighbour tracks, circular motion and
//! arrival prediction, background change trigger, and SORT-style 2D
//! tracking-by-detection.

mod boxes;
mod change;
mod hungarian;
pub mod io;
mod motion;
mod nn3d;
mod sort;

use thiserror::Error;

pub use boxes::{iou, BBox, Detection2D};
pub use change::{change_trigger, Grid, Roi};
pub use hungarian::{assignment_cost, hungarian};
pub use motion::{estimate_motion, fit_circle, predict_arrival, CircularMotion, DEFAULT_OMEGA_MIN};
pub use nn3d::{associate_nn_3d, NnAssociation, NnTracker, Track3D};
pub use sort::{sort_step, SortConfig, SortStep, SortTracker, Track2D};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackingError {
    #[error("point time {point} is not after track {track} last time {last}")]
    NonMonotonicTimestamp { track: u64, last: f64, point: f64 },
    #[error("need at least {need} samples, have {have}")]
    TooFewSamples { need: usize, have: usize },
    #[error("points are collinear")]
    CollinearPoints,
    #[error("track history spans zero time")]
    ZeroTimeSpan,
    #[error("table is stationary (|omega| = {0})")]
    TableStationary(f64),
    #[error("grid dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("region of interest is out of bounds or empty")]
    RoiOutOfBounds,
    #[error("gate must be positive")]
    NonPositiveGate,
}

pub type Result<T> = std::result::Result<T, TrackingError>;
