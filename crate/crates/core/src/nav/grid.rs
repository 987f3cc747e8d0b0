use serde::{Deserialize, Serialize};

use super::{NavError, Result};
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Free,
    Occupied,
    Unknown,
}

/// Sidecar metadata for a PGM map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub resolution: f64,
    pub origin: [f64; 2],
}

/// Row-major cells; row 0 is the lowest `y`. Cell `(ix, iy)` covers
/// `origin + [ix, ix + 1) × [iy, iy + 1)` times the resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: [f64; 2],
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: [f64; 2], cells: Vec<Cell>) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(NavError::Invalid(format!("resolution must be positive, got {resolution}")));
        }
        if width * height != cells.len() {
            return Err(NavError::Invalid(format!("{width}x{height} grid with {} cells", cells.len())));
        }
        Ok(OccupancyGrid { width, height, resolution, origin, cells })
    }

    pub fn empty(width: usize, height: usize, resolution: f64, origin: [f64; 2]) -> Result<Self> {
        Self::new(width, height, resolution, origin, vec![Cell::Free; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta { resolution: self.resolution, origin: self.origin }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn get(&self, ix: usize, iy: usize) -> Cell {
        self.cells[iy * self.width + ix]
    }

    pub fn set(&mut self, ix: usize, iy: usize, c: Cell) {
        self.cells[iy * self.width + ix] = c;
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [self.origin[0] + (ix as f64 + 0.5) * self.resolution, self.origin[1] + (iy as f64 + 0.5) * self.resolution]
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = ((x - self.origin[0]) / self.resolution).floor();
        let fy = ((y - self.origin[1]) / self.resolution).floor();
        (fx >= 0.0 && fy >= 0.0 && fx < self.width as f64 && fy < self.height as f64)
            .then_some((fx as usize, fy as usize))
    }

    /// Closed extent of the map.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let ex = self.width as f64 * self.resolution;
        let ey = self.height as f64 * self.resolution;
        (0.0..=ex).contains(&(x - self.origin[0])) && (0.0..=ey).contains(&(y - self.origin[1]))
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64 * self.resolution).hypot(self.height as f64 * self.resolution)
    }

    /// Centers of every cell that is not known to be free, at `z = 0`.
    pub fn blocked_centers(&self) -> Vec<Point3> {
        let mut out = Vec::new();
        for iy in 0..self.height {
            for ix in 0..self.width {
                if self.get(ix, iy) != Cell::Free {
                    let [x, y] = self.cell_center(ix, iy);
                    out.push(Point3::new(x, y, 0.0));
                }
            }
        }
        out
    }

    /// Text PGM (P2): 0 occupied, 255 free, 128 unknown; the first image row
    /// is the top (largest `y`) row of the map.
    pub fn to_pgm(&self) -> String {
        let mut s = format!("P2\n{} {}\n255\n", self.width, self.height);
        for iy in (0..self.height).rev() {
            let row: Vec<&str> = (0..self.width)
                .map(|ix| match self.get(ix, iy) {
                    Cell::Free => "255",
                    Cell::Occupied => "0",
                    Cell::Unknown => "128",
                })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_pgm(text: &str, meta: GridMeta) -> Result<Self> {
        let mut tokens = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
        let mut next = |what: &str| tokens.next().ok_or_else(|| NavError::Pgm(format!("missing {what}")));
        let magic = next("magic")?;
        if magic != "P2" {
            return Err(NavError::Pgm(format!("expected P2, found {magic}")));
        }
        let mut num = |what: &str| -> Result<usize> {
            let t = next(what)?;
            t.parse().map_err(|_| NavError::Pgm(format!("bad {what} `{t}`")))
        };
        let width = num("width")?;
        let height = num("height")?;
        let maxval = num("maxval")?;
        if maxval != 255 {
            return Err(NavError::Pgm(format!("maxval must be 255, found {maxval}")));
        }
        let mut cells = vec![Cell::Free; width * height];
        for row in 0..height {
            let iy = height - 1 - row;
            for ix in 0..width {
                cells[iy * width + ix] = match num("pixel")? {
                    0 => Cell::Occupied,
                    255 => Cell::Free,
                    128 => Cell::Unknown,
                    v => return Err(NavError::Pgm(format!("pixel value {v} at row {row}, column {ix}"))),
                };
            }
        }
        OccupancyGrid::new(width, height, meta.resolution, meta.origin, cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_and_orientation() {
        let mut g = OccupancyGrid::empty(3, 2, 0.1, [1.0, 2.0]).unwrap();
        g.set(0, 1, Cell::Occupied);
        g.set(2, 0, Cell::Unknown);
        let text = g.to_pgm();
        assert_eq!(text, "P2\n3 2\n255\n0 255 255\n255 255 128\n");
        assert_eq!(OccupancyGrid::from_pgm(&text, g.meta()).unwrap(), g);
    }

    #[test]
    fn pgm_errors() {
        let meta = GridMeta { resolution: 0.1, origin: [0.0, 0.0] };
        assert!(OccupancyGrid::from_pgm("P5\n1 1\n255\n0\n", meta).is_err());
        assert!(OccupancyGrid::from_pgm("P2\n1 1\n255\n7\n", meta).is_err());
        assert!(OccupancyGrid::from_pgm("P2\n2 1\n255\n0\n", meta).is_err());
        assert!(OccupancyGrid::from_pgm("P2 # c\n1 1\n255\n0\n", meta).is_ok());
    }

    #[test]
    fn cell_lookup() {
        let g = OccupancyGrid::empty(10, 5, 0.5, [-1.0, 0.0]).unwrap();
        assert_eq!(g.cell_of(-1.0, 0.0), Some((0, 0)));
        assert_eq!(g.cell_of(3.99, 2.49), Some((9, 4)));
        assert_eq!(g.cell_of(4.0, 0.0), None);
        assert_eq!(g.cell_center(1, 1), [-0.25, 0.75]);
        assert!(g.contains(4.0, 2.5) && !g.contains(4.01, 0.0));
    }
}
