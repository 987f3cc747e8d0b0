use serde::{Deserialize, Serialize};

use super::{
    convex_hull, estimate_normals, euclidean_cluster, extract_prism, segment_plane, voxel_downsample_indexed, Axis,
    Cluster, Plane, PlaneSearch, PointCloud, Polygon2, Result,
};
use crate::parallel::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    /// Voxel leaf; `None` skips downsampling.
    pub leaf: Option<f64>,
    pub passthrough: Vec<(Axis, f64, f64)>,
    pub normals_k: usize,
    pub plane: PlaneSearch,
    pub prism_min: f64,
    pub prism_max: f64,
    pub cluster_tol: f64,
    pub cluster_min: usize,
    pub cluster_max: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            leaf: Some(0.005),
            passthrough: Vec::new(),
            normals_k: 10,
            plane: PlaneSearch::default(),
            prism_min: 0.01,
            prism_max: 0.3,
            cluster_tol: 0.02,
            cluster_min: 25,
            cluster_max: 20000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSegmentation {
    /// Filtered cloud with normals; plane, prism and cluster indices refer to it.
    pub cloud: PointCloud,
    /// For each filtered point, the raw-cloud indices it summarizes.
    pub sources: Vec<Vec<usize>>,
    pub plane: Plane,
    pub polygon: Polygon2,
    pub prism: Vec<usize>,
    pub clusters: Vec<Cluster>,
}

/// Raw cloud to object clusters on the dominant horizontal support surface.
pub fn segment_scene(raw: &PointCloud, cfg: &SceneConfig, exec: Execution) -> Result<SceneSegmentation> {
    let (mut cloud, mut sources) = match cfg.leaf {
        Some(leaf) => voxel_downsample_indexed(raw, leaf)?,
        None => (raw.clone(), (0..raw.len()).map(|i| vec![i]).collect()),
    };
    for &(axis, lo, hi) in &cfg.passthrough {
        if lo > hi {
            return Err(super::CloudError::InvertedRange { lo, hi });
        }
        let a = axis.index();
        let keep: Vec<usize> = (0..cloud.len()).filter(|&i| (lo..=hi).contains(&cloud.points()[i][a])).collect();
        sources = keep.iter().map(|&i| std::mem::take(&mut sources[i])).collect();
        cloud = cloud.select(&keep);
    }
    let cloud = estimate_normals(&cloud, cfg.normals_k, exec)?;
    let plane = segment_plane(&cloud, &cfg.plane, exec)?;
    let polygon = convex_hull(&plane, &cloud)?;
    let prism = extract_prism(&cloud, &polygon, cfg.prism_min, cfg.prism_max)?;
    let clusters = euclidean_cluster(&cloud, &prism, cfg.cluster_tol, cfg.cluster_min, cfg.cluster_max);
    Ok(SceneSegmentation { cloud, sources, plane, polygon, prism, clusters })
}
