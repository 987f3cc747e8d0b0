use serde::{Deserialize, Serialize};

/// Positions (radians) and normalized loads of the two finger servos.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperFeedback {
    pub position: [f64; 2],
    pub force: [f64; 2],
}

/// Linear finger model: `gap = open_gap - meters_per_rad * (p0 + p1)`,
/// floored at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerModel {
    pub open_gap: f64,
    pub meters_per_rad: f64,
}

impl FingerModel {
    pub fn gap(&self, fb: &GripperFeedback) -> f64 {
        (self.open_gap - self.meters_per_rad * (fb.position[0] + fb.position[1])).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraspMonitorConfig {
    pub force_min: f64,
    pub gap_min: f64,
    pub gap_max: f64,
    pub fingers: FingerModel,
}

impl Default for GraspMonitorConfig {
    fn default() -> Self {
        GraspMonitorConfig {
            force_min: 0.3,
            gap_min: 0.005,
            gap_max: 0.06,
            fingers: FingerModel { open_gap: 0.07, meters_per_rad: 0.025 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraspState {
    Grasped,
    Empty,
}

pub fn grasp_monitor(fb: &GripperFeedback, cfg: &GraspMonitorConfig) -> GraspState {
    let force = (fb.force[0] + fb.force[1]) / 2.0;
    let gap = cfg.fingers.gap(fb);
    if force >= cfg.force_min && (cfg.gap_min..=cfg.gap_max).contains(&gap) {
        GraspState::Grasped
    } else {
        GraspState::Empty
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fb(force: f64, pos: f64) -> GripperFeedback {
        GripperFeedback { position: [pos, pos], force: [force, force] }
    }

    #[test]
    fn monitor_rules() {
        let cfg = GraspMonitorConfig::default();
        // gap = 0.07 - 0.025 * 1.0 = 0.045, inside [0.005, 0.06]
        assert_eq!(grasp_monitor(&fb(0.6, 0.5), &cfg), GraspState::Grasped);
        assert_eq!(grasp_monitor(&fb(0.05, 0.5), &cfg), GraspState::Empty);
        // fully closed: gap 0
        assert_eq!(grasp_monitor(&fb(0.6, 1.4), &cfg), GraspState::Empty);
    }
}
