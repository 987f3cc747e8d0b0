//! Point clouds and the tabletop segmentation chain: voxel grid, passthrough,
//! normals, horizontal plane, convex hull, prism and Euclidean clustering.

mod cluster;
mod filters;
mod hull;
mod normals;
mod pipeline;
mod plane;
pub mod ply;

use thiserror::Error;

use crate::geometry::{Point3, Vector3};

pub use cluster::{euclidean_cluster, Cluster};
pub use filters::{passthrough, voxel_downsample, voxel_downsample_indexed, Axis};
pub use hull::{convex_hull, extract_prism, point_in_polygon, PlaneBasis, Polygon2};
pub use normals::estimate_normals;
pub use pipeline::{segment_scene, SceneConfig, SceneSegmentation};
pub use plane::{segment_plane, Plane, PlaneSearch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CloudError {
    #[error("voxel leaf must be positive, got {0}")]
    NonPositiveLeaf(f64),
    #[error("passthrough range is inverted: [{lo}, {hi}]")]
    InvertedRange { lo: f64, hi: f64 },
    #[error("need at least {need} points, cloud has {have}")]
    TooFewPoints { need: usize, have: usize },
    #[error("neighbourhood of point {0} is degenerate")]
    DegenerateNeighborhood(usize),
    #[error("cloud has no normals")]
    MissingNormals,
    #[error("no admissible plane found")]
    NoAdmissiblePlane,
    #[error("plane inliers are collinear")]
    DegenerateInliers,
    #[error("prism height range is invalid: [{lo}, {hi}]")]
    InvertedHeightRange { lo: f64, hi: f64 },
    #[error("invalid cloud: {0}")]
    Invalid(String),
    #[error("ply line {line}: {msg}")]
    Ply { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, CloudError>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point3>,
    normals: Option<Vec<Vector3>>,
    pub frame: String,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, frame: impl Into<String>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(CloudError::Invalid(format!("point {i} is not finite")));
        }
        Ok(PointCloud { points, normals: None, frame: frame.into() })
    }

    pub fn with_normals(mut self, normals: Vec<Vector3>) -> Result<Self> {
        if normals.len() != self.points.len() {
            return Err(CloudError::Invalid(format!("{} normals for {} points", normals.len(), self.points.len())));
        }
        if let Some(i) = normals.iter().position(|n| (n.norm() - 1.0).abs() > 1e-6) {
            return Err(CloudError::Invalid(format!("normal {i} is not unit length")));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vector3]> {
        self.normals.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sub-cloud of the given indices, normals carried along.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self.normals.as_ref().map(|n| indices.iter().map(|&i| n[i]).collect()),
            frame: self.frame.clone(),
        }
    }

    pub fn centroid_of(&self, indices: &[usize]) -> Point3 {
        let mut sum = Vector3::zeros();
        for &i in indices {
            sum += self.points[i].coords;
        }
        Point3::from(sum / indices.len() as f64)
    }
}
