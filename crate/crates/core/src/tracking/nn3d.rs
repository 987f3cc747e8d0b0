use serde::{Deserialize, Serialize};

use super::{Result, TrackingError};
use crate::geometry::Point3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track3D {
    pub id: u64,
    /// Strictly increasing timestamps.
    pub history: Vec<(f64, Point3)>,
}

impl Track3D {
    pub fn last(&self) -> Option<&(f64, Point3)> {
        self.history.last()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NnAssociation {
    /// `(track index, point index)` in the order they were matched.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_points: Vec<usize>,
    pub unmatched_tracks: Vec<usize>,
}

/// Greedy globally-nearest matching: repeatedly take the closest unmatched
/// (track, point) pair until the closest remaining one is beyond `gate`.
/// Matched points are appended to their tracks; nothing is modified on error.
pub fn associate_nn_3d(tracks: &mut [Track3D], points: &[(f64, Point3)], gate: f64) -> Result<NnAssociation> {
    if !(gate > 0.0) {
        return Err(TrackingError::NonPositiveGate);
    }
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (ti, t) in tracks.iter().enumerate() {
        let Some((_, last)) = t.last() else { continue };
        for (pi, (_, p)) in points.iter().enumerate() {
            let d = (p - last).norm();
            if d <= gate {
                cand.push((d, ti, pi));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut track_used = vec![false; tracks.len()];
    let mut point_used = vec![false; points.len()];
    let mut pairs = Vec::new();
    for (_, ti, pi) in cand {
        if !track_used[ti] && !point_used[pi] {
            track_used[ti] = true;
            point_used[pi] = true;
            pairs.push((ti, pi));
        }
    }
    for &(ti, pi) in &pairs {
        let last = tracks[ti].last().map(|l| l.0).unwrap_or(f64::NEG_INFINITY);
        if points[pi].0 <= last {
            return Err(TrackingError::NonMonotonicTimestamp { track: tracks[ti].id, last, point: points[pi].0 });
        }
    }
    for &(ti, pi) in &pairs {
        tracks[ti].history.push(points[pi]);
    }
    Ok(NnAssociation {
        pairs,
        unmatched_points: (0..points.len()).filter(|&i| !point_used[i]).collect(),
        unmatched_tracks: (0..tracks.len()).filter(|&i| !track_used[i]).collect(),
    })
}

/// Nearest-neighbour tracker: unmatched points open new tracks, tracks not
/// seen for longer than `max_gap` seconds are closed.
#[derive(Debug, Clone)]
pub struct NnTracker {
    pub gate: f64,
    pub max_gap: f64,
    pub active: Vec<Track3D>,
    pub closed: Vec<Track3D>,
    next_id: u64,
}

impl NnTracker {
    pub fn new(gate: f64, max_gap: f64) -> Self {
        NnTracker { gate, max_gap, active: Vec::new(), closed: Vec::new(), next_id: 0 }
    }

    /// Returns the track id given to each point.
    pub fn step(&mut self, t: f64, points: &[Point3]) -> Result<Vec<u64>> {
        let timed: Vec<(f64, Point3)> = points.iter().map(|p| (t, *p)).collect();
        let assoc = associate_nn_3d(&mut self.active, &timed, self.gate)?;
        let mut ids = vec![0; points.len()];
        for &(ti, pi) in &assoc.pairs {
            ids[pi] = self.active[ti].id;
        }
        for &pi in &assoc.unmatched_points {
            let id = self.next_id;
            self.next_id += 1;
            self.active.push(Track3D { id, history: vec![timed[pi]] });
            ids[pi] = id;
        }
        let (keep, stale): (Vec<_>, Vec<_>) = std::mem::take(&mut self.active)
            .into_iter()
            .partition(|tr| tr.last().is_some_and(|l| t - l.0 <= self.max_gap));
        self.active = keep;
        self.closed.extend(stale);
        Ok(ids)
    }

    pub fn all_tracks(&self) -> impl Iterator<Item = &Track3D> {
        self.closed.iter().chain(self.active.iter())
    }
}
