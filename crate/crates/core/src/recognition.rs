//! Object pose from principal axes and fusion of 2D/3D classifier scores.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Matrix3, Rotation3, SymmetricEigen, UnitQuaternion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::{Cluster, PointCloud};
use crate::geometry::{canonical_forward, pose_from_parts, Pose, Vector3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecognitionError {
    #[error("cluster covariance has rank < 2")]
    DegenerateCluster,
    #[error("no inventory label has a non-zero fused score")]
    NoAdmissibleLabel,
    #[error("invalid scores: {0}")]
    InvalidScores(String),
    #[error("inventory is empty")]
    EmptyInventory,
}

pub type Result<T> = std::result::Result<T, RecognitionError>;

/// Pose at the centroid with axes along the principal directions (largest
/// variance first) and the square roots of the eigenvalues as extents.
pub fn pca_pose(cloud: &PointCloud, cluster: &Cluster) -> Result<(Pose, [f64; 3])> {
    let idx = &cluster.indices;
    if idx.len() < 3 {
        return Err(RecognitionError::DegenerateCluster);
    }
    let c = cloud.centroid_of(idx);
    let mut cov = Matrix3::zeros();
    for &i in idx {
        let d = cloud.points()[i] - c;
        cov += d * d.transpose();
    }
    cov /= idx.len() as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let ev = order.map(|i| eig.eigenvalues[i].max(0.0));
    if ev[1] <= 1e-12 * ev[0].max(f64::MIN_POSITIVE) {
        return Err(RecognitionError::DegenerateCluster);
    }
    let a1 = canonical_forward(eig.eigenvectors.column(order[0]).into_owned().normalize());
    let raw2: Vector3 = eig.eigenvectors.column(order[1]).into_owned();
    let a2 = canonical_forward((raw2 - a1 * a1.dot(&raw2)).normalize());
    let a3 = a1.cross(&a2);
    let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[a1, a2, a3]));
    let pose = pose_from_parts(c, UnitQuaternion::from_rotation_matrix(&rot));
    Ok((pose, ev.map(f64::sqrt)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreSource {
    TwoD,
    ThreeD,
}

/// Per-label classifier scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectScores {
    scores: BTreeMap<String, f64>,
    pub source: ScoreSource,
}

impl ObjectScores {
    pub fn new(scores: BTreeMap<String, f64>, source: ScoreSource) -> Result<Self> {
        if scores.is_empty() {
            return Err(RecognitionError::InvalidScores("no labels".into()));
        }
        if let Some((l, s)) = scores.iter().find(|(_, s)| !(s.is_finite() && (0.0..=1.0).contains(*s))) {
            return Err(RecognitionError::InvalidScores(format!("score {s} for '{l}' outside [0, 1]")));
        }
        Ok(ObjectScores { scores, source })
    }

    pub fn from_json(text: &str, source: ScoreSource) -> std::result::Result<Self, String> {
        let map: BTreeMap<String, f64> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Self::new(map, source).map_err(|e| e.to_string())
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.scores.get(label).copied()
    }

    pub fn scores(&self) -> &BTreeMap<String, f64> {
        &self.scores
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inventory(BTreeSet<String>);

impl Inventory {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(labels: I) -> Result<Self> {
        let set: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        if set.is_empty() {
            return Err(RecognitionError::EmptyInventory);
        }
        Ok(Inventory(set))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }
}

/// Score used for a label a source did not report.
pub const NEUTRAL_SCORE: f64 = 0.5;

/// Product fusion restricted to the inventory; ties go to the
/// lexicographically smallest label. Confidence is the winner's share of the
/// fused mass.
pub fn fuse(scores3d: &ObjectScores, scores2d: &ObjectScores, inventory: &Inventory) -> Result<(String, f64)> {
    let mut best: Option<(&str, f64)> = None;
    let mut total = 0.0;
    for label in inventory.labels() {
        let f = scores3d.get(label).unwrap_or(NEUTRAL_SCORE) * scores2d.get(label).unwrap_or(NEUTRAL_SCORE);
        total += f;
        if best.is_none_or(|(_, b)| f > b) {
            best = Some((label, f));
        }
    }
    match best {
        Some((label, f)) if total > 0.0 && f > 0.0 => Ok((label.to_string(), f / total)),
        _ => Err(RecognitionError::NoAdmissibleLabel),
    }
}

/// Source of per-cluster classifier scores (a trained model in deployment).
pub trait ScoreProvider {
    fn scores(&self, cloud: &PointCloud, cluster: &Cluster) -> Result<ObjectScores>;
}

/// Returns the same scores for every cluster.
#[derive(Debug, Clone)]
pub struct FixedScores(pub ObjectScores);

impl ScoreProvider for FixedScores {
    fn scores(&self, _: &PointCloud, _: &Cluster) -> Result<ObjectScores> {
        Ok(self.0.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectHypothesis {
    pub label: Option<String>,
    pub confidence: f64,
    pub pose: crate::geometry::PoseJson,
    pub extents: [f64; 3],
}

/// Pose every cluster and, when both providers are given, label it.
pub fn recognize(
    cloud: &PointCloud,
    clusters: &[Cluster],
    providers: Option<(&dyn ScoreProvider, &dyn ScoreProvider)>,
    inventory: Option<&Inventory>,
) -> Result<Vec<ObjectHypothesis>> {
    clusters
        .iter()
        .map(|k| {
            let (pose, extents) = pca_pose(cloud, k)?;
            let (label, confidence) = match (providers, inventory) {
                (Some((p3, p2)), Some(inv)) => {
                    let (l, c) = fuse(&p3.scores(cloud, k)?, &p2.scores(cloud, k)?, inv)?;
                    (Some(l), c)
                }
                _ => (None, 0.0),
            };
            Ok(ObjectHypothesis { label, confidence, pose: (&pose).into(), extents })
        })
        .collect()
}
