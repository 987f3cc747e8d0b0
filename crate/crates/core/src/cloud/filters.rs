use std::collections::BTreeMap;

use super::{CloudError, PointCloud, Result};
use crate::geometry::{Point3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Replaces the points of every occupied voxel by their centroid. Voxel
/// `floor(p / leaf)` per axis; output ordered by voxel key; normals dropped.
pub fn voxel_downsample(cloud: &PointCloud, leaf: f64) -> Result<PointCloud> {
    voxel_downsample_indexed(cloud, leaf).map(|(c, _)| c)
}

/// As [`voxel_downsample`], also returning the source indices of each voxel.
pub fn voxel_downsample_indexed(cloud: &PointCloud, leaf: f64) -> Result<(PointCloud, Vec<Vec<usize>>)> {
    if !(leaf > 0.0) || !leaf.is_finite() {
        return Err(CloudError::NonPositiveLeaf(leaf));
    }
    let mut voxels: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, p) in cloud.points().iter().enumerate() {
        let k = ((p.x / leaf).floor() as i64, (p.y / leaf).floor() as i64, (p.z / leaf).floor() as i64);
        voxels.entry(k).or_default().push(i);
    }
    let mut points = Vec::with_capacity(voxels.len());
    let mut members = Vec::with_capacity(voxels.len());
    for idx in voxels.into_values() {
        let pts = cloud.points();
        let mut sum = Vector3::zeros();
        let mut lo = pts[idx[0]].coords;
        let mut hi = lo;
        for &i in &idx {
            sum += pts[i].coords;
            lo = lo.inf(&pts[i].coords);
            hi = hi.sup(&pts[i].coords);
        }
        // rounding in the mean must not leave the members' bounding box
        let mean = (sum / idx.len() as f64).sup(&lo).inf(&hi);
        points.push(Point3::from(mean));
        members.push(idx);
    }
    Ok((PointCloud::new(points, cloud.frame.clone())?, members))
}

/// Keeps points with `lo <= coord(axis) <= hi`, preserving order and normals.
pub fn passthrough(cloud: &PointCloud, axis: Axis, lo: f64, hi: f64) -> Result<PointCloud> {
    if lo > hi {
        return Err(CloudError::InvertedRange { lo, hi });
    }
    let a = axis.index();
    let keep: Vec<usize> = (0..cloud.len())
        .filter(|&i| {
            let c = cloud.points()[i][a];
            lo <= c && c <= hi
        })
        .collect();
    Ok(cloud.select(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n).map(|_| Point3::new(rng.random(), rng.random(), rng.random())).collect();
        PointCloud::new(pts, "test").unwrap()
    }

    #[test]
    fn empty_cloud_stays_empty() {
        let c = PointCloud::new(vec![], "f").unwrap();
        assert!(voxel_downsample(&c, 0.01).unwrap().is_empty());
    }

    #[test]
    fn cube_corners_collapse_to_center() {
        let mut pts = Vec::new();
        for x in [0.0, 0.01] {
            for y in [0.0, 0.01] {
                for z in [0.0, 0.01] {
                    pts.push(Point3::new(x, y, z));
                }
            }
        }
        let out = voxel_downsample(&PointCloud::new(pts, "f").unwrap(), 0.1).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.points()[0] - Point3::new(0.005, 0.005, 0.005)).norm() < 1e-15);
    }

    #[test]
    fn voxel_count_matches_hash_binning() {
        let c = random_cloud(1000, 11);
        let oracle: HashSet<(i32, i32, i32)> =
            c.points().iter().map(|p| ((p.x * 4.0) as i32, (p.y * 4.0) as i32, (p.z * 4.0) as i32)).collect();
        let out = voxel_downsample(&c, 0.25).unwrap();
        assert_eq!(out.len(), oracle.len());
        assert!(out.normals().is_none());
    }

    #[test]
    fn rejects_bad_leaf() {
        let c = random_cloud(3, 1);
        assert_eq!(voxel_downsample(&c, 0.0), Err(CloudError::NonPositiveLeaf(0.0)));
        assert!(voxel_downsample(&c, -1.0).is_err());
    }

    #[test]
    fn passthrough_closed_interval() {
        let pts = vec![Point3::new(0.0, 0.0, 0.1), Point3::new(0.0, 0.0, 0.5), Point3::new(0.0, 0.0, 0.9)];
        let c = PointCloud::new(pts, "f").unwrap();
        let out = passthrough(&c, Axis::Z, 0.2, 0.8).unwrap();
        assert_eq!(out.points(), &[Point3::new(0.0, 0.0, 0.5)]);
        let edge = passthrough(&c, Axis::Z, 0.1, 0.2).unwrap();
        assert_eq!(edge.len(), 1);
        assert_eq!(passthrough(&c, Axis::Z, 0.8, 0.2), Err(CloudError::InvertedRange { lo: 0.8, hi: 0.2 }));
    }

    #[test]
    fn passthrough_matches_linear_scan() {
        let c = random_cloud(500, 5);
        let out = passthrough(&c, Axis::Y, 0.3, 0.6).unwrap();
        let want: Vec<Point3> = c.points().iter().copied().filter(|p| p.y >= 0.3 && p.y <= 0.6).collect();
        assert_eq!(out.points(), want.as_slice());
    }

    proptest! {
        #[test]
        fn voxel_points_stay_in_their_voxel(seed in 0u64..500, leaf in 0.01f64..0.5) {
            let c = random_cloud(200, seed);
            let out = voxel_downsample(&c, leaf).unwrap();
            prop_assert!(out.len() <= c.len());
            let (_, members) = voxel_downsample_indexed(&c, leaf).unwrap();
            for (p, m) in out.points().iter().zip(&members) {
                let q = c.points()[m[0]];
                for a in 0..3 {
                    let cell = (q[a] / leaf).floor();
                    prop_assert!(p[a] >= cell * leaf - 1e-12 && p[a] <= (cell + 1.0) * leaf + 1e-12);
                }
            }
        }

        #[test]
        fn passthrough_is_idempotent(seed in 0u64..500, lo in 0.0f64..0.5, w in 0.0f64..0.5) {
            let c = random_cloud(100, seed);
            let once = passthrough(&c, Axis::X, lo, lo + w).unwrap();
            let twice = passthrough(&once, Axis::X, lo, lo + w).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
