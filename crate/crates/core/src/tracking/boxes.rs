use serde::{Deserialize, Serialize};

/// Axis-aligned image box by center and size, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection2D {
    pub t: f64,
    #[serde(flatten)]
    pub bbox: BBox,
    pub score: f64,
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let ix = ((a.cx + a.w / 2.0).min(b.cx + b.w / 2.0) - (a.cx - a.w / 2.0).max(b.cx - b.w / 2.0)).max(0.0);
    let iy = ((a.cy + a.h / 2.0).min(b.cy + b.h / 2.0) - (a.cy - a.h / 2.0).max(b.cy - b.h / 2.0)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union > 0.0 {
        (inter / union).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(cx: f64, cy: f64, w: f64, h: f64) -> BBox {
        BBox { cx, cy, w, h }
    }

    #[test]
    fn iou_cases() {
        assert_eq!(iou(&b(1.0, 1.0, 2.0, 3.0), &b(1.0, 1.0, 2.0, 3.0)), 1.0);
        assert_eq!(iou(&b(0.0, 0.0, 1.0, 1.0), &b(5.0, 5.0, 1.0, 1.0)), 0.0);
        assert!((iou(&b(0.0, 0.0, 1.0, 1.0), &b(0.5, 0.0, 1.0, 1.0)) - 1.0 / 3.0).abs() < 1e-12);
    }
}
