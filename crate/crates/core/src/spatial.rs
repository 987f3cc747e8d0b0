//! Uniform hash-grid index over 3D points for radius and k-nearest queries.

use std::collections::HashMap;

use crate::geometry::Point3;

type Key = (i64, i64, i64);

pub struct PointIndex<'a> {
    points: &'a [Point3],
    cell: f64,
    buckets: HashMap<Key, Vec<usize>>,
    lo: Key,
    hi: Key,
}

impl<'a> PointIndex<'a> {
    /// Indexes `indices` of `points` with cubic buckets of side `cell`.
    pub fn new(points: &'a [Point3], indices: impl IntoIterator<Item = usize>, cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        let mut buckets: HashMap<Key, Vec<usize>> = HashMap::new();
        let mut lo = (i64::MAX, i64::MAX, i64::MAX);
        let mut hi = (i64::MIN, i64::MIN, i64::MIN);
        for i in indices {
            let k = key(&points[i], cell);
            lo = (lo.0.min(k.0), lo.1.min(k.1), lo.2.min(k.2));
            hi = (hi.0.max(k.0), hi.1.max(k.1), hi.2.max(k.2));
            buckets.entry(k).or_default().push(i);
        }
        PointIndex { points, cell, buckets, lo, hi }
    }

    pub fn all(points: &'a [Point3], cell: f64) -> Self {
        Self::new(points, 0..points.len(), cell)
    }

    /// Bucket size giving roughly `k` points per bucket on surface-like data.
    pub fn suggest_cell(points: &[Point3], k: usize) -> f64 {
        if points.is_empty() {
            return 1.0;
        }
        let mut mn = points[0].coords;
        let mut mx = points[0].coords;
        for p in points {
            mn = mn.inf(&p.coords);
            mx = mx.sup(&p.coords);
        }
        let extent = (mx - mn).max();
        let c = extent * (k.max(1) as f64 / points.len() as f64).sqrt();
        if c > 0.0 {
            c
        } else {
            1.0
        }
    }

    /// Indices within distance `r` (inclusive) of `q`, ascending.
    pub fn within(&self, q: &Point3, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.buckets.is_empty() {
            return out;
        }
        let (a, b) =
            (key(&(q - nalgebra::Vector3::repeat(r)), self.cell), key(&(q + nalgebra::Vector3::repeat(r)), self.cell));
        let r2 = r * r;
        for x in a.0.max(self.lo.0)..=b.0.min(self.hi.0) {
            for y in a.1.max(self.lo.1)..=b.1.min(self.hi.1) {
                for z in a.2.max(self.lo.2)..=b.2.min(self.hi.2) {
                    if let Some(bucket) = self.buckets.get(&(x, y, z)) {
                        out.extend(bucket.iter().copied().filter(|&i| (self.points[i] - q).norm_squared() <= r2));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The `k` nearest indexed points to `q`, ordered by (distance, index).
    pub fn knn(&self, q: &Point3, k: usize) -> Vec<usize> {
        let mut cand: Vec<(f64, usize)> = Vec::new();
        if k == 0 || self.buckets.is_empty() {
            return Vec::new();
        }
        self.shells(q, |s, bucket| {
            cand.extend(bucket.iter().map(|&i| ((self.points[i] - q).norm_squared(), i)));
            if cand.len() >= k
                && s.is_some_and(|bound| {
                    cand.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    cand[k - 1].0 <= bound * bound
                })
            {
                return true;
            }
            false
        });
        cand.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cand.truncate(k);
        cand.into_iter().map(|(_, i)| i).collect()
    }

    /// Nearest indexed point and its distance, ties to the lower index.
    pub fn nearest(&self, q: &Point3) -> Option<(usize, f64)> {
        let mut best: Option<(f64, usize)> = None;
        if self.buckets.is_empty() {
            return None;
        }
        self.shells(q, |s, bucket| {
            for &i in bucket {
                let d = (self.points[i] - q).norm_squared();
                if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                    best = Some((d, i));
                }
            }
            matches!((s, best), (Some(bound), Some((bd, _))) if bd <= bound * bound)
        });
        best.map(|(d, i)| (i, d.sqrt()))
    }

    /// Visits non-empty buckets in growing Chebyshev shells around `q`'s
    /// bucket. After each shell `visit` is called with `Some(bound)`, a lower
    /// bound on the distance to any unvisited point, and an empty slice; it
    /// returns true to stop.
    fn shells(&self, q: &Point3, mut visit: impl FnMut(Option<f64>, &[usize]) -> bool) {
        let c = key(q, self.cell);
        let span = [
            (c.0 - self.lo.0).abs().max((self.hi.0 - c.0).abs()),
            (c.1 - self.lo.1).abs().max((self.hi.1 - c.1).abs()),
            (c.2 - self.lo.2).abs().max((self.hi.2 - c.2).abs()),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);
        let range = |s: i64, c: i64, lo: i64, hi: i64| (-s).max(lo - c)..=s.min(hi - c);
        for s in 0..=span {
            for dx in range(s, c.0, self.lo.0, self.hi.0) {
                for dy in range(s, c.1, self.lo.1, self.hi.1) {
                    let on_face = dx.abs() == s || dy.abs() == s;
                    for dz in range(s, c.2, self.lo.2, self.hi.2) {
                        if !on_face && dz.abs() != s {
                            continue;
                        }
                        if let Some(bucket) = self.buckets.get(&(c.0 + dx, c.1 + dy, c.2 + dz)) {
                            if visit(None, bucket) {
                                return;
                            }
                        }
                    }
                }
            }
            if visit(Some(s as f64 * self.cell), &[]) {
                return;
            }
        }
    }
}

fn key(p: &Point3, cell: f64) -> Key {
    ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64)
}
