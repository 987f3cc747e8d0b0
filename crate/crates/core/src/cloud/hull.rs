use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{CloudError, Plane, PointCloud, Result};
use crate::geometry::{Point3, Vector3};

/// Boundary tolerance for prism membership (meters).
const BOUNDARY_EPS: f64 = 1e-9;

/// Orthonormal 2D coordinate system embedded in a plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneBasis {
    pub origin: Point3,
    pub u: Vector3,
    pub v: Vector3,
}

impl PlaneBasis {
    /// `u` follows world x projected into the plane (world y if x is nearly
    /// normal to the plane), `v = normal × u`.
    pub fn for_plane(normal: &Vector3, origin: Point3) -> Self {
        let seed = if normal.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = (seed - normal * normal.dot(&seed)).normalize();
        let v = normal.cross(&u);
        PlaneBasis { origin, u, v }
    }

    pub fn normal(&self) -> Vector3 {
        self.u.cross(&self.v)
    }

    pub fn project(&self, p: &Point3) -> Vector2<f64> {
        let d = p - self.origin;
        Vector2::new(d.dot(&self.u), d.dot(&self.v))
    }

    pub fn height(&self, p: &Point3) -> f64 {
        (p - self.origin).dot(&self.normal())
    }

    pub fn lift(&self, uv: &Vector2<f64>) -> Point3 {
        self.origin + self.u * uv.x + self.v * uv.y
    }
}

/// Convex polygon in a plane basis, counter-clockwise, no collinear vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2 {
    pub vertices: Vec<Vector2<f64>>,
    pub basis: PlaneBasis,
}

impl Polygon2 {
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| cross(&self.vertices[i], &self.vertices[(i + 1) % n])).sum::<f64>() / 2.0
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vector2<f64>, Vector2<f64>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Distance from `p` to the nearest edge segment.
    pub fn edge_distance(&self, p: &Vector2<f64>) -> f64 {
        self.edges().map(|(a, b)| segment_distance(p, &a, &b)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &Vector2<f64>) -> bool {
        point_in_polygon(&self.vertices, p, 0.0)
    }

    pub fn bounds(&self) -> (Vector2<f64>, Vector2<f64>) {
        let mut lo = self.vertices[0];
        let mut hi = lo;
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }
}

fn cross(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn turn(o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    cross(&(a - o), &(b - o))
}

pub(crate) fn segment_distance(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + ab * t - p).norm()
}

/// Inside-or-on test for a CCW convex polygon, with `eps` slack in meters.
pub fn point_in_polygon(vertices: &[Vector2<f64>], p: &Vector2<f64>, eps: f64) -> bool {
    let n = vertices.len();
    (0..n).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let e = b - a;
        cross(&e, &(p - a)) >= -eps * e.norm()
    })
}

/// Andrew's monotone chain; collinear boundary points are dropped.
pub(crate) fn hull_2d(mut pts: Vec<Vector2<f64>>) -> Vec<Vector2<f64>> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vector2<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Vector2<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Projects the plane's inliers into its 2D basis and returns their hull.
pub fn convex_hull(plane: &Plane, cloud: &PointCloud) -> Result<Polygon2> {
    if plane.inliers.len() < 3 {
        return Err(CloudError::DegenerateInliers);
    }
    let c = cloud.centroid_of(&plane.inliers);
    let origin = c - plane.normal * plane.signed_distance(&c);
    let basis = PlaneBasis::for_plane(&plane.normal, origin);
    let projected = plane.inliers.iter().map(|&i| basis.project(&cloud.points()[i])).collect();
    let vertices = hull_2d(projected);
    let poly = Polygon2 { vertices, basis };
    if poly.vertices.len() < 3 || poly.signed_area() <= 0.0 {
        return Err(CloudError::DegenerateInliers);
    }
    Ok(poly)
}

/// Indices of points whose height above the polygon's plane lies in
/// `[h_min, h_max]` and whose projection is inside or on the polygon.
pub fn extract_prism(cloud: &PointCloud, polygon: &Polygon2, h_min: f64, h_max: f64) -> Result<Vec<usize>> {
    if !(0.0 <= h_min && h_min < h_max) {
        return Err(CloudError::InvertedHeightRange { lo: h_min, hi: h_max });
    }
    let b = &polygon.basis;
    Ok((0..cloud.len())
        .filter(|&i| {
            let p = &cloud.points()[i];
            let h = b.height(p);
            h >= h_min - BOUNDARY_EPS
                && h <= h_max + BOUNDARY_EPS
                && point_in_polygon(&polygon.vertices, &b.project(p), BOUNDARY_EPS)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat_plane(pts: &[Point3]) -> (Plane, PointCloud) {
        let cloud = PointCloud::new(pts.to_vec(), "f").unwrap();
        let plane = Plane { normal: Vector3::z(), offset: 0.0, inliers: (0..pts.len()).collect() };
        (plane, cloud)
    }

    #[test]
    fn unit_square_hull() {
        let mut pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.5, 0.0, 0.0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            pts.push(Point3::new(rng.random_range(0.1..0.9), rng.random_range(0.1..0.9), 0.0));
        }
        let (plane, cloud) = flat_plane(&pts);
        let hull = convex_hull(&plane, &cloud).unwrap();
        assert_eq!(hull.vertices.len(), 4);
        assert!((hull.signed_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hull_matches_extreme_point_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point3> = (0..100).map(|_| Point3::new(rng.random(), rng.random(), 0.0)).collect();
        let (plane, cloud) = flat_plane(&pts);
        let hull = convex_hull(&plane, &cloud).unwrap();
        let proj: Vec<Vector2<f64>> = pts.iter().map(|p| hull.basis.project(p)).collect();
        // extreme point: not inside any triangle of three other points
        let mut extreme = Vec::new();
        for (i, p) in proj.iter().enumerate() {
            let mut inside = false;
            'outer: for a in 0..proj.len() {
                for b in 0..proj.len() {
                    for c in 0..proj.len() {
                        if [a, b, c].contains(&i) || a == b || b == c || a == c {
                            continue;
                        }
                        let (d1, d2, d3) =
                            (turn(&proj[a], &proj[b], p), turn(&proj[b], &proj[c], p), turn(&proj[c], &proj[a], p));
                        if (d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0) || (d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0) {
                            inside = true;
                            break 'outer;
                        }
                    }
                }
            }
            if !inside {
                extreme.push(*p);
            }
        }
        let mut got = hull.vertices.clone();
        let key = |v: &Vector2<f64>| (v.x.to_bits(), v.y.to_bits());
        got.sort_by_key(key);
        extreme.sort_by_key(key);
        assert_eq!(got, extreme);
        assert!(hull.signed_area() > 0.0);
        for p in &proj {
            assert!(point_in_polygon(&hull.vertices, p, 1e-12));
        }
    }

    #[test]
    fn collinear_inliers_are_degenerate() {
        let pts: Vec<Point3> = (0..5).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let (plane, cloud) = flat_plane(&pts);
        assert_eq!(convex_hull(&plane, &cloud), Err(CloudError::DegenerateInliers));
    }

    fn square_polygon() -> Polygon2 {
        let pts = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let (plane, cloud) = flat_plane(&pts);
        convex_hull(&plane, &cloud).unwrap()
    }

    #[test]
    fn prism_membership() {
        let poly = square_polygon();
        let b = poly.basis;
        let at_centroid = b.lift(&Vector2::new(0.0, 0.0)) + b.normal() * 0.05;
        let below = b.lift(&Vector2::new(0.0, 0.0)) - b.normal() * 0.02;
        let vertex = b.lift(&poly.vertices[2]) + b.normal() * 0.01;
        let cloud = PointCloud::new(vec![at_centroid, below, vertex], "f").unwrap();
        assert_eq!(extract_prism(&cloud, &poly, 0.01, 0.2).unwrap(), vec![0, 2]);
        assert!(matches!(extract_prism(&cloud, &poly, 0.2, 0.1), Err(CloudError::InvertedHeightRange { .. })));
        assert!(extract_prism(&cloud, &poly, -0.1, 0.1).is_err());
    }
}
