use nalgebra::{Matrix3, SymmetricEigen};

use super::{CloudError, PointCloud, Result};
use crate::geometry::{Point3, Vector3};
use crate::parallel::Execution;
use crate::spatial::PointIndex;

/// Per-point normals from the covariance of the `k` nearest neighbours (the
/// point itself included), oriented toward the sensor at the origin.
pub fn estimate_normals(cloud: &PointCloud, k: usize, exec: Execution) -> Result<PointCloud> {
    if k < 3 || cloud.len() < k {
        return Err(CloudError::TooFewPoints { need: k.max(3), have: cloud.len() });
    }
    let pts = cloud.points();
    let index = PointIndex::all(pts, PointIndex::suggest_cell(pts, k));
    let normals = exec.map_range(pts.len(), |i| {
        let nb = index.knn(&pts[i], k);
        local_normal(pts, &nb).map(|n| orient_toward_origin(n, &pts[i])).ok_or(CloudError::DegenerateNeighborhood(i))
    });
    let normals = normals.into_iter().collect::<Result<Vec<_>>>()?;
    cloud.clone().with_normals(normals)
}

/// Smallest-eigenvalue eigenvector of the neighbourhood covariance.
pub(crate) fn local_normal(pts: &[Point3], nb: &[usize]) -> Option<Vector3> {
    let n = nb.len() as f64;
    let mean = nb.iter().fold(Vector3::zeros(), |s, &i| s + pts[i].coords) / n;
    let mut cov = Matrix3::zeros();
    for &i in nb {
        let d = pts[i].coords - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    if cov.trace() <= 1e-24 {
        return None;
    }
    let eig = SymmetricEigen::new(cov);
    let imin = eig.eigenvalues.imin();
    let v: Vector3 = eig.eigenvectors.column(imin).into();
    Some(v.normalize())
}

fn orient_toward_origin(n: Vector3, p: &Point3) -> Vector3 {
    if n.dot(&(-p.coords)) < 0.0 {
        -n
    } else {
        n
    }
}
