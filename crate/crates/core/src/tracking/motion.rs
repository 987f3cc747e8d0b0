use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{Result, Track3D, TrackingError};
use crate::geometry::wrap_angle;

pub const DEFAULT_OMEGA_MIN: f64 = 1e-3;

/// Uniform circular motion: `angle(t) = phase0 + omega * (t - t_ref)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularMotion {
    pub center: [f64; 2],
    pub radius: f64,
    pub omega: f64,
    pub phase0: f64,
    pub t_ref: f64,
}

impl CircularMotion {
    pub fn angle_at(&self, t: f64) -> f64 {
        self.phase0 + self.omega * (t - self.t_ref)
    }

    pub fn position_at(&self, t: f64) -> [f64; 2] {
        let a = self.angle_at(t);
        [self.center[0] + self.radius * a.cos(), self.center[1] + self.radius * a.sin()]
    }
}

/// Algebraic (Kåsa) least-squares circle, solved on mean-centred data.
pub fn fit_circle(points: &[[f64; 2]]) -> Result<([f64; 2], f64)> {
    if points.len() < 3 {
        return Err(TrackingError::TooFewSamples { need: 3, have: points.len() });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut suu, mut suv, mut svv, mut suuu, mut svvv, mut suvv, mut svuu) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let (u, v) = (p[0] - mx, p[1] - my);
        suu += u * u;
        suv += u * v;
        svv += v * v;
        suuu += u * u * u;
        svvv += v * v * v;
        suvv += u * v * v;
        svuu += v * u * u;
    }
    let det = suu * svv - suv * suv;
    if !(det > 1e-12 * (suu + svv).powi(2)) {
        return Err(TrackingError::CollinearPoints);
    }
    let bu = 0.5 * (suuu + suvv);
    let bv = 0.5 * (svvv + svuu);
    let uc = (bu * svv - bv * suv) / det;
    let vc = (suu * bv - suv * bu) / det;
    let r = (uc * uc + vc * vc + (suu + svv) / n).sqrt();
    Ok(([uc + mx, vc + my], r))
}

/// Fits the circle (or uses `center_hint`), unwraps the per-sample angles and
/// regresses them linearly on time, referenced to the last sample.
pub fn estimate_motion(track: &Track3D, center_hint: Option<[f64; 2]>) -> Result<CircularMotion> {
    let h = &track.history;
    if h.len() < 3 {
        return Err(TrackingError::TooFewSamples { need: 3, have: h.len() });
    }
    let t_ref = h[h.len() - 1].0;
    if !(t_ref - h[0].0 > 0.0) {
        return Err(TrackingError::ZeroTimeSpan);
    }
    let xy: Vec<[f64; 2]> = h.iter().map(|(_, p)| [p.x, p.y]).collect();
    let (center, radius) = match center_hint {
        Some(c) => {
            let r = xy.iter().map(|p| (p[0] - c[0]).hypot(p[1] - c[1])).sum::<f64>() / xy.len() as f64;
            (c, r)
        }
        None => fit_circle(&xy)?,
    };
    let mut theta = Vec::with_capacity(xy.len());
    for p in &xy {
        let a = (p[1] - center[1]).atan2(p[0] - center[0]);
        let unwrapped = match theta.last() {
            Some(&prev) => prev + wrap_angle(a - prev),
            None => a,
        };
        theta.push(unwrapped);
    }
    let n = h.len() as f64;
    let tm = h.iter().map(|s| s.0 - t_ref).sum::<f64>() / n;
    let am = theta.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (s, a) in h.iter().zip(&theta) {
        let dt = s.0 - t_ref - tm;
        sxy += dt * (a - am);
        sxx += dt * dt;
    }
    let omega = sxy / sxx;
    let phase0 = wrap_angle(am - omega * tm);
    Ok(CircularMotion { center, radius, omega, phase0, t_ref })
}

/// Earliest `t >= t_now + lead` at which the motion reaches `target_angle`
/// (mod 2π).
pub fn predict_arrival(
    motion: &CircularMotion,
    target_angle: f64,
    t_now: f64,
    lead: f64,
    omega_min: f64,
) -> Result<f64> {
    let w = motion.omega;
    if !(w.abs() > omega_min) {
        return Err(TrackingError::TableStationary(w.abs()));
    }
    let t0 = t_now + lead;
    let gap = if w > 0.0 { target_angle - motion.angle_at(t0) } else { motion.angle_at(t0) - target_angle };
    let mut delta = gap.rem_euclid(TAU);
    if TAU - delta < 1e-12 {
        delta = 0.0;
    }
    Ok(t0 + delta / w.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn track_of(samples: impl Iterator<Item = (f64, f64, f64)>) -> Track3D {
        Track3D { id: 0, history: samples.map(|(t, x, y)| (t, Point3::new(x, y, 0.7))).collect() }
    }

    #[test]
    fn circumcircle() {
        let (c, r) = fit_circle(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert!(c[0].abs() < 1e-9 && c[1].abs() < 1e-9);
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recovers_generator_circle() {
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|k| {
                let a = k as f64 * 0.11;
                [0.3 + 0.25 * a.cos(), -0.2 + 0.25 * a.sin()]
            })
            .collect();
        let (c, r) = fit_circle(&pts).unwrap();
        assert!((c[0] - 0.3).abs() < 1e-9 && (c[1] + 0.2).abs() < 1e-9 && (r - 0.25).abs() < 1e-9);
    }

    #[test]
    fn collinear_rejected() {
        assert_eq!(fit_circle(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]), Err(TrackingError::CollinearPoints));
    }

    #[test]
    fn exact_linear_phase() {
        let tr = track_of((0..8).map(|k| {
            let a = k as f64 * PI / 10.0;
            (k as f64 * 0.1, a.cos(), a.sin())
        }));
        let m = estimate_motion(&tr, None).unwrap();
        assert!((m.omega - PI).abs() < 1e-9);
        assert!((m.phase0 - 7.0 * PI / 10.0).abs() < 1e-9);
        let cw = track_of((0..8).map(|k| {
            let a = -(k as f64) * 0.2;
            (k as f64 * 0.1, a.cos(), a.sin())
        }));
        assert!(estimate_motion(&cw, None).unwrap().omega < 0.0);
    }

    #[test]
    fn motion_errors() {
        let same_t = track_of((0..4).map(|k| (1.0, (k as f64).cos(), (k as f64).sin())));
        assert_eq!(estimate_motion(&same_t, None), Err(TrackingError::ZeroTimeSpan));
        let short = track_of((0..2).map(|k| (k as f64, 1.0, 0.0)));
        assert!(matches!(estimate_motion(&short, None), Err(TrackingError::TooFewSamples { .. })));
    }

    #[test]
    fn arrival_examples() {
        let m = CircularMotion { center: [0.0, 0.0], radius: 1.0, omega: PI / 2.0, phase0: 0.0, t_ref: 2.0 };
        assert!((predict_arrival(&m, PI / 2.0, 2.0, 0.0, DEFAULT_OMEGA_MIN).unwrap() - 3.0).abs() < 1e-12);
        assert!((predict_arrival(&m, PI / 2.0, 2.0, 1.5, DEFAULT_OMEGA_MIN).unwrap() - 7.0).abs() < 1e-12);
        let ccw = CircularMotion { omega: -PI / 2.0, ..m };
        assert!((predict_arrival(&ccw, PI / 2.0, 2.0, 0.0, DEFAULT_OMEGA_MIN).unwrap() - 5.0).abs() < 1e-12);
        let still = CircularMotion { omega: 1e-4, ..m };
        assert!(matches!(
            predict_arrival(&still, 0.0, 0.0, 0.0, DEFAULT_OMEGA_MIN),
            Err(TrackingError::TableStationary(_))
        ));
    }

    proptest! {
        #[test]
        fn arrival_hits_target(phase in -PI..PI, omega in prop_oneof![-3.0f64..-0.01, 0.01f64..3.0],
                               target in -10.0f64..10.0, t_now in 0.0f64..100.0, lead in 0.0f64..5.0) {
            let m = CircularMotion { center: [0.0, 0.0], radius: 1.0, omega, phase0: phase, t_ref: t_now - 1.0 };
            let t = predict_arrival(&m, target, t_now, lead, DEFAULT_OMEGA_MIN).unwrap();
            prop_assert!(t >= t_now + lead);
            prop_assert!(wrap_angle(m.angle_at(t) - target).abs() < 1e-9);
            prop_assert!(t - (t_now + lead) < TAU / omega.abs() + 1e-9);
        }

        #[test]
        fn rotation_equivariance(phi in -PI..PI, omega in 0.2f64..2.0, a0 in -PI..PI) {
            let gen = |shift: f64| track_of((0..20).map(move |k| {
                let t = k as f64 * 0.1;
                let a = a0 + omega * t + shift;
                (t, 0.4 + 0.3 * a.cos(), -0.1 + 0.3 * a.sin())
            }));
            let m0 = estimate_motion(&gen(0.0), None).unwrap();
            let m1 = estimate_motion(&gen(phi), None).unwrap();
            prop_assert!((m0.omega - m1.omega).abs() < 1e-6);
            prop_assert!((m0.radius - m1.radius).abs() < 1e-6);
            prop_assert!(wrap_angle(m1.phase0 - m0.phase0 - phi).abs() < 1e-6);
        }
    }
}
