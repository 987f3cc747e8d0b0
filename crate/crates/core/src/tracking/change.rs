use serde::{Deserialize, Serialize};

use super::{Result, TrackingError};

/// Row-major grid of intensities or depths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(width * height, data.len(), "grid data length");
        Grid { width, height, data }
    }

    pub fn filled(width: usize, height: usize, v: f64) -> Self {
        Grid::new(width, height, vec![v; width * height])
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// True iff the fraction of ROI cells with `|current - reference| > delta`
/// strictly exceeds `frac`.
pub fn change_trigger(reference: &Grid, current: &Grid, roi: Roi, delta: f64, frac: f64) -> Result<bool> {
    if (reference.width, reference.height) != (current.width, current.height) {
        return Err(TrackingError::DimensionMismatch(
            (reference.width, reference.height),
            (current.width, current.height),
        ));
    }
    if roi.w == 0 || roi.h == 0 || roi.x + roi.w > reference.width || roi.y + roi.h > reference.height {
        return Err(TrackingError::RoiOutOfBounds);
    }
    let mut changed = 0usize;
    for y in roi.y..roi.y + roi.h {
        for x in roi.x..roi.x + roi.w {
            if (current.at(x, y) - reference.at(x, y)).abs() > delta {
                changed += 1;
            }
        }
    }
    Ok(changed as f64 / (roi.w * roi.h) as f64 > frac)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROI: Roi = Roi { x: 1, y: 1, w: 2, h: 2 };

    #[test]
    fn identical_grids_do_not_trigger() {
        let g = Grid::filled(4, 4, 1.0);
        assert!(!change_trigger(&g, &g, ROI, 0.1, 0.0).unwrap());
    }

    #[test]
    fn full_change_triggers() {
        let a = Grid::filled(4, 4, 1.0);
        let b = Grid::filled(4, 4, 1.2);
        assert!(change_trigger(&a, &b, ROI, 0.1, 0.5).unwrap());
    }

    #[test]
    fn exact_fraction_does_not_trigger() {
        let a = Grid::filled(4, 4, 0.0);
        let mut b = a.clone();
        b.set(1, 1, 1.0);
        b.set(2, 1, 1.0);
        assert!(!change_trigger(&a, &b, ROI, 0.5, 0.5).unwrap());
        b.set(1, 2, 1.0);
        assert!(change_trigger(&a, &b, ROI, 0.5, 0.5).unwrap());
    }

    #[test]
    fn errors() {
        let a = Grid::filled(4, 4, 0.0);
        let b = Grid::filled(3, 4, 0.0);
        assert!(matches!(change_trigger(&a, &b, ROI, 0.1, 0.1), Err(TrackingError::DimensionMismatch(..))));
        let roi = Roi { x: 3, y: 0, w: 2, h: 1 };
        assert_eq!(change_trigger(&a, &a, roi, 0.1, 0.1), Err(TrackingError::RoiOutOfBounds));
    }
}
