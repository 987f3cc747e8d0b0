use nalgebra::{Matrix3, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CloudError, PointCloud, Result};
use crate::geometry::{canonical_up, line_angle, Vector3};
use crate::parallel::Execution;

/// `{p : normal · p + offset = 0}`, normal in the +z hemisphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vector3,
    pub offset: f64,
    pub inliers: Vec<usize>,
}

impl Plane {
    pub fn signed_distance(&self, p: &crate::geometry::Point3) -> f64 {
        self.normal.dot(&p.coords) + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlaneSearch {
    pub dist_thresh: f64,
    pub ref_axis: Vector3,
    pub angle_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PlaneSearch {
    fn default() -> Self {
        PlaneSearch {
            dist_thresh: 0.005,
            ref_axis: Vector3::z(),
            angle_tol: 10f64.to_radians(),
            max_iters: 500,
            seed: 0,
        }
    }
}

/// RANSAC over 3-point samples restricted to planes within `angle_tol` of
/// `ref_axis`. Inliers must be within `dist_thresh` of the plane and have a
/// point normal within `angle_tol` of the plane normal. The winning hypothesis
/// is refit to its inliers by least squares when that keeps it admissible and
/// does not lose inliers.
pub fn segment_plane(cloud: &PointCloud, cfg: &PlaneSearch, exec: Execution) -> Result<Plane> {
    let normals = cloud.normals().ok_or(CloudError::MissingNormals)?;
    let pts = cloud.points();
    if pts.len() < 3 {
        return Err(CloudError::TooFewPoints { need: 3, have: pts.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<[usize; 3]> = (0..cfg.max_iters)
        .map(|_| {
            let s = rand::seq::index::sample(&mut rng, pts.len(), 3);
            [s.index(0), s.index(1), s.index(2)]
        })
        .collect();

    let admissible = |n: &Vector3| line_angle(n, &cfg.ref_axis) <= cfg.angle_tol;
    let inliers_of = |n: &Vector3, d: f64| -> Vec<usize> {
        (0..pts.len())
            .filter(|&i| {
                (n.dot(&pts[i].coords) + d).abs() <= cfg.dist_thresh && line_angle(&normals[i], n) <= cfg.angle_tol
            })
            .collect()
    };

    let hypotheses = exec.map(&samples, |&[a, b, c]| {
        let cross = (pts[b] - pts[a]).cross(&(pts[c] - pts[a]));
        let len = cross.norm();
        if !(len > 1e-12) {
            return None;
        }
        let n = canonical_up(cross / len);
        if !admissible(&n) {
            return None;
        }
        let d = -n.dot(&pts[a].coords);
        let count = inliers_of(&n, d).len();
        (count >= 3).then_some((n, d, count))
    });

    let mut best: Option<(Vector3, f64, usize)> = None;
    for h in hypotheses.into_iter().flatten() {
        if best.is_none_or(|b| h.2 > b.2) {
            best = Some(h);
        }
    }
    let (n, d, _) = best.ok_or(CloudError::NoAdmissiblePlane)?;
    let inliers = inliers_of(&n, d);
    let mut plane = Plane { normal: n, offset: d, inliers };

    if let Some((rn, rd)) = fit_plane(cloud, &plane.inliers) {
        if admissible(&rn) {
            let refit = inliers_of(&rn, rd);
            if refit.len() >= plane.inliers.len() {
                plane = Plane { normal: rn, offset: rd, inliers: refit };
            }
        }
    }
    Ok(plane)
}

/// Total least-squares plane through the given points.
pub(crate) fn fit_plane(cloud: &PointCloud, idx: &[usize]) -> Option<(Vector3, f64)> {
    if idx.len() < 3 {
        return None;
    }
    let c = cloud.centroid_of(idx);
    let mut cov = Matrix3::zeros();
    for &i in idx {
        let d = cloud.points()[i] - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // rank < 2: no plane
    if eig.eigenvalues[order[1]] <= 1e-12 * eig.eigenvalues[order[2]].max(1e-300) {
        return None;
    }
    let n = canonical_up(eig.eigenvectors.column(order[0]).into_owned().normalize());
    Some((n, -n.dot(&c.coords)))
}
