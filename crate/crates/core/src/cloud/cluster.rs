use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::geometry::Point3;
use crate::spatial::PointIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Ascending indices into the source cloud.
    pub indices: Vec<usize>,
    pub centroid: Point3,
}

/// Connected components of `subset` under the "within `tol`" relation, keeping
/// components with `min_size..=max_size` members, sorted by centroid (x, y, z).
pub fn euclidean_cluster(
    cloud: &PointCloud,
    subset: &[usize],
    tol: f64,
    min_size: usize,
    max_size: usize,
) -> Vec<Cluster> {
    let mut subset = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if subset.is_empty() {
        return Vec::new();
    }
    let pts = cloud.points();
    let index = PointIndex::new(pts, subset.iter().copied(), tol);
    let mut visited = vec![false; pts.len()];
    let mut out = Vec::new();
    for &seed in &subset {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        let mut members = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(i) = queue.pop_front() {
            for j in index.within(&pts[i], tol) {
                if !visited[j] {
                    visited[j] = true;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        if members.len() >= min_size && members.len() <= max_size {
            members.sort_unstable();
            let centroid = cloud.centroid_of(&members);
            out.push(Cluster { indices: members, centroid });
        }
    }
    out.sort_by(|a, b| {
        a.centroid
            .x
            .total_cmp(&b.centroid.x)
            .then(a.centroid.y.total_cmp(&b.centroid.y))
            .then(a.centroid.z.total_cmp(&b.centroid.z))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blob(center: Point3, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point3> {
        (0..n)
            .map(|_| {
                center
                    + nalgebra::Vector3::new(
                        rng.random_range(-0.005..0.005),
                        rng.random_range(-0.005..0.005),
                        rng.random_range(-0.005..0.005),
                    )
            })
            .collect()
    }

    #[test]
    fn two_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pts = blob(Point3::new(0.0, 0.0, 0.0), 20, &mut rng);
        pts.extend(blob(Point3::new(0.1, 0.0, 0.0), 20, &mut rng));
        let c = PointCloud::new(pts, "f").unwrap();
        let all: Vec<usize> = (0..40).collect();
        let clusters = euclidean_cluster(&c, &all, 0.02, 1, 1000);
        assert_eq!(clusters.len(), 2);
        assert!(clusters.iter().all(|k| k.indices.len() == 20));
        assert!(clusters[0].centroid.x < clusters[1].centroid.x);
    }

    #[test]
    fn chain_is_transitive() {
        let pts: Vec<Point3> = (0..50).map(|i| Point3::new(i as f64 * 0.01, 0.0, 0.0)).collect();
        let c = PointCloud::new(pts, "f").unwrap();
        let clusters = euclidean_cluster(&c, &(0..50).collect::<Vec<_>>(), 0.02, 1, 100);
        assert_eq!(clusters.len(), 1);
    }

    #[test]
    fn size_filter_and_duplicates() {
        let pts = vec![Point3::new(1.0, 2.0, 3.0); 5];
        let c = PointCloud::new(pts, "f").unwrap();
        let k = euclidean_cluster(&c, &[0, 1, 2, 3, 4, 4], 0.01, 1, 10);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].centroid, Point3::new(1.0, 2.0, 3.0));
        assert!(euclidean_cluster(&c, &[0, 1, 2, 3, 4], 0.01, 6, 10).is_empty());
        assert!(euclidean_cluster(&c, &[], 0.01, 1, 10).is_empty());
    }

    fn union_find_oracle(pts: &[Point3], tol: f64) -> Vec<Vec<usize>> {
        let n = pts.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for i in 0..n {
            for j in i + 1..n {
                if (pts[i] - pts[j]).norm() <= tol {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let mut groups = std::collections::BTreeMap::<usize, Vec<usize>>::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut v: Vec<Vec<usize>> = groups.into_values().collect();
        v.sort();
        v
    }

    proptest! {
        #[test]
        fn partition_matches_union_find(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Point3> = (0..150).map(|_| Point3::new(rng.random(), rng.random(), rng.random::<f64>() * 0.2)).collect();
            let c = PointCloud::new(pts.clone(), "f").unwrap();
            let mut got: Vec<Vec<usize>> = euclidean_cluster(&c, &(0..150).collect::<Vec<_>>(), 0.08, 1, 1000)
                .into_iter().map(|k| k.indices).collect();
            got.sort();
            prop_assert_eq!(got, union_find_oracle(&pts, 0.08));
        }
    }
}
