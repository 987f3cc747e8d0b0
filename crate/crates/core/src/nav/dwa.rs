use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::grid::OccupancyGrid;
use super::{NavError, Result};
use crate::geometry::{wrap_angle, Point3};
use crate::parallel::Execution;
use crate::spatial::PointIndex;

/// Added to the clearance in the obstacle cost term (meters).
const OBSTACLE_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Body-frame velocities.
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl RobotState {
    pub fn at_rest(x: f64, y: f64, theta: f64) -> Self {
        RobotState { x, y, theta, vx: 0.0, vy: 0.0, omega: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwaConfig {
    /// Limits on each body-frame translational axis.
    pub v_max: f64,
    pub v_min: f64,
    pub omega_max: f64,
    pub accel: [f64; 3],
    pub dt: f64,
    pub horizon: f64,
    /// Samples per axis (vx, vy, omega), endpoints included.
    pub samples: [usize; 3],
    pub w_goal: f64,
    pub w_obs: f64,
    pub w_vel: f64,
    pub robot_radius: f64,
}

impl Default for DwaConfig {
    fn default() -> Self {
        DwaConfig {
            v_max: 0.8,
            v_min: -0.8,
            omega_max: 1.5,
            accel: [1.0, 1.0, 2.0],
            dt: 0.1,
            horizon: 1.5,
            samples: [7, 7, 9],
            w_goal: 1.0,
            w_obs: 0.2,
            w_vel: 0.1,
            robot_radius: 0.2,
        }
    }
}

impl DwaConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.horizon >= self.dt
            && self.v_min <= self.v_max
            && self.omega_max >= 0.0
            && self.accel.iter().all(|a| *a >= 0.0)
            && self.samples.iter().all(|n| *n >= 1)
            && self.w_goal >= 0.0
            && self.w_obs >= 0.0
            && self.w_vel >= 0.0
            && self.robot_radius >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(NavError::Invalid(format!("{self:?}")))
        }
    }

    fn steps(&self) -> usize {
        ((self.horizon / self.dt) + 1e-9).floor() as usize
    }
}

/// Reachable velocity intervals `[lo, hi]` for (vx, vy, omega).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window(pub [[f64; 2]; 3]);

impl Window {
    pub fn contains(&self, c: &VelocityCommand) -> bool {
        [c.vx, c.vy, c.omega].iter().zip(&self.0).all(|(v, [lo, hi])| *lo <= *v && *v <= *hi)
    }
}

fn clip_interval(current: f64, reach: f64, lo: f64, hi: f64) -> [f64; 2] {
    let a = (current - reach).max(lo);
    let b = (current + reach).min(hi);
    if a <= b {
        [a, b]
    } else {
        // current velocity outside the limits: the nearest limit is the window
        let v = current.clamp(lo, hi);
        [v, v]
    }
}

pub fn dynamic_window(state: &RobotState, cfg: &DwaConfig) -> Window {
    let [ax, ay, aw] = cfg.accel;
    Window([
        clip_interval(state.vx, ax * cfg.dt, cfg.v_min, cfg.v_max),
        clip_interval(state.vy, ay * cfg.dt, cfg.v_min, cfg.v_max),
        clip_interval(state.omega, aw * cfg.dt, -cfg.omega_max, cfg.omega_max),
    ])
}

/// Pose after holding `cmd` for `t` seconds, integrated in closed form.
fn advance(x: f64, y: f64, theta: f64, cmd: &VelocityCommand, t: f64) -> (f64, f64, f64) {
    let (s, c) = if cmd.omega.abs() < 1e-12 {
        (theta.sin() * t, theta.cos() * t)
    } else {
        let th1 = theta + cmd.omega * t;
        ((theta.cos() - th1.cos()) / cmd.omega, (th1.sin() - theta.sin()) / cmd.omega)
    };
    // ∫cos = c, ∫sin = s; world velocity = R(theta) * (vx, vy)
    (x + cmd.vx * c - cmd.vy * s, y + cmd.vx * s + cmd.vy * c, theta + cmd.omega * t)
}

/// Poses `(x, y, theta)` at `dt, 2dt, …` up to the horizon.
pub fn rollout(state: &RobotState, cmd: &VelocityCommand, cfg: &DwaConfig) -> Vec<(f64, f64, f64)> {
    (1..=cfg.steps()).map(|k| advance(state.x, state.y, state.theta, cmd, k as f64 * cfg.dt)).collect()
}

fn clearance_with(
    traj: &[(f64, f64, f64)],
    grid: &OccupancyGrid,
    obstacles: &PointIndex<'_>,
    robot_radius: f64,
) -> Result<f64> {
    let mut best = grid.diagonal();
    for &(x, y, _) in traj {
        if !grid.contains(x, y) {
            return Err(NavError::TrajectoryLeavesMap);
        }
        if let Some((_, d)) = obstacles.nearest(&Point3::new(x, y, 0.0)) {
            best = best.min((d - robot_radius).max(0.0));
        }
    }
    Ok(best)
}

/// Smallest distance from any trajectory pose to a non-free cell center,
/// less the robot radius and floored at zero. Maps with no blocked cells
/// report the map diagonal.
pub fn clearance(traj: &[(f64, f64, f64)], grid: &OccupancyGrid, robot_radius: f64) -> Result<f64> {
    let points = grid.blocked_centers();
    let obstacles = PointIndex::all(&points, grid.resolution() * 4.0);
    clearance_with(traj, grid, &obstacles, robot_radius)
}

fn linspace([lo, hi]: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// Samples of the dynamic window in order (vx outer, omega inner).
fn window_samples(w: &Window, cfg: &DwaConfig) -> Vec<VelocityCommand> {
    let vx = linspace(w.0[0], cfg.samples[0]);
    let vy = linspace(w.0[1], cfg.samples[1]);
    let om = linspace(w.0[2], cfg.samples[2]);
    let mut out = Vec::with_capacity(vx.len() * vy.len() * om.len());
    for &a in &vx {
        for &b in &vy {
            for &c in &om {
                out.push(VelocityCommand { vx: a, vy: b, omega: c });
            }
        }
    }
    out
}

/// Scores every window sample and returns the cheapest collision-free one,
/// the earliest sample winning ties. Samples faster than `v_max` in the plane
/// or whose rollout leaves the map are discarded like colliding ones.
pub fn dwa_step(
    state: &RobotState,
    goal: [f64; 2],
    grid: &OccupancyGrid,
    cfg: &DwaConfig,
    exec: Execution,
) -> Result<VelocityCommand> {
    cfg.validate()?;
    if !goal.iter().all(|g| g.is_finite()) {
        return Err(NavError::Invalid("goal must be finite".into()));
    }
    let points = grid.blocked_centers();
    let obstacles = PointIndex::all(&points, grid.resolution() * 4.0);
    let samples = window_samples(&dynamic_window(state, cfg), cfg);
    let costs = exec.map(&samples, |cmd| {
        if cmd.vx.hypot(cmd.vy) > cfg.v_max {
            return None;
        }
        let traj = rollout(state, cmd, cfg);
        let clear = clearance_with(&traj, grid, &obstacles, cfg.robot_radius).ok()?;
        if clear <= 0.0 {
            return None;
        }
        let &(fx, fy, _) = traj.last()?;
        let speed = cmd.vx.hypot(cmd.vy);
        Some(
            cfg.w_goal * (fx - goal[0]).hypot(fy - goal[1])
                + cfg.w_obs / (clear + OBSTACLE_EPS)
                + cfg.w_vel * (cfg.v_max - speed),
        )
    });
    let mut best: Option<(f64, usize)> = None;
    for (i, c) in costs.iter().enumerate() {
        if let Some(c) = *c {
            if best.is_none_or(|(b, _)| c < b) {
                best = Some((c, i));
            }
        }
    }
    best.map(|(_, i)| samples[i]).ok_or(NavError::NoAdmissibleVelocity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpisodeOutcome {
    Reached,
    Blocked,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    /// States before each step, plus the final state.
    pub states: Vec<RobotState>,
    pub commands: Vec<VelocityCommand>,
    pub outcome: EpisodeOutcome,
}

/// Closed loop: plan, hold the command for one period, repeat until within
/// `goal_tol` of the goal, blocked, or out of steps.
pub fn run_episode(
    start: RobotState,
    goal: [f64; 2],
    grid: &OccupancyGrid,
    cfg: &DwaConfig,
    max_steps: usize,
    goal_tol: f64,
    exec: Execution,
) -> Result<Episode> {
    let mut state = start;
    let mut states = vec![state];
    let mut commands = Vec::new();
    let reached = |s: &RobotState| (s.x - goal[0]).hypot(s.y - goal[1]) <= goal_tol;
    for _ in 0..max_steps {
        if reached(&state) {
            return Ok(Episode { states, commands, outcome: EpisodeOutcome::Reached });
        }
        let cmd = match dwa_step(&state, goal, grid, cfg, exec) {
            Ok(c) => c,
            Err(NavError::NoAdmissibleVelocity) => {
                return Ok(Episode { states, commands, outcome: EpisodeOutcome::Blocked });
            }
            Err(e) => return Err(e),
        };
        let (x, y, theta) = advance(state.x, state.y, state.theta, &cmd, cfg.dt);
        state = RobotState { x, y, theta: wrap_angle(theta), vx: cmd.vx, vy: cmd.vy, omega: cmd.omega };
        commands.push(cmd);
        states.push(state);
    }
    let outcome = if reached(&state) { EpisodeOutcome::Reached } else { EpisodeOutcome::StepLimit };
    Ok(Episode { states, commands, outcome })
}

/// CSV with one row per state: `step,t,x,y,theta,vx,vy,omega`.
pub fn write_pose_log(ep: &Episode, dt: f64) -> String {
    let mut s = String::from("step,t,x,y,theta,vx,vy,omega\n");
    for (k, st) in ep.states.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{},{},{},{},{}", k, k as f64 * dt, st.x, st.y, st.theta, st.vx, st.vy, st.omega);
    }
    s
}
