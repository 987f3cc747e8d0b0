//! Command-line front end: one subcommand per pipeline. Outputs go to the
//! `--out` path, a JSON summary to stdout, and pipeline errors to stderr as
//! `{"error": kind, "message": text}`.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cloud::ply::{read_ply, write_ply};
use crate::cloud::{segment_scene, PointCloud, Polygon2, SceneConfig};
use crate::execution::{execute, parse_fault_script, Bindings, ExecConfig};
use crate::geometry::{frame_from_z_x, pose_from_parts, Point3, Pose, PoseJson};
use crate::grasp::{
    decide_approach, sample_pregrasp, select_reachable, GraspConfig, JointConfig, KinematicChain, EXAMPLE_READY,
};
use crate::nav::{run_episode, write_pose_log, DwaConfig, GridMeta, OccupancyGrid, RobotState};
use crate::placement::{rank_placements, sample_placements, workstation_model, PlacementConfig};
use crate::planning::{parse_domain, parse_problem, plan, validate, write_plan, PlanMode};
use crate::recognition::{pca_pose, recognize};
use crate::sim::{
    evaluate_rtt, gen_rtt_stream, gen_workstation, perception_metrics, to_jsonl, NnParams, RttScenario, TrackerKind,
    WorkstationScenario, WorkstationTruth,
};
use crate::tracking::io::write_detections;
use crate::tracking::SortConfig;
use crate::Execution;

#[derive(Parser, Debug)]
#[command(name = "workcell", version, about = "Mobile manipulation pipelines on recorded or generated scenarios")]
struct Cli {
    /// Run every pipeline on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a scenario's data and ground truth into a directory.
    Gen(GenArgs),
    /// Segment the support plane and objects, and pose each object.
    Perceive(PerceiveArgs),
    /// Sample and rank free placement poses on the support surface.
    Place(PlaceArgs),
    /// Plan a reachable pre-grasp for one perceived object.
    Grasp(GraspArgs),
    /// Track objects on a rotating table and score the tracker.
    Rtt(RttArgs),
    /// Drive to a goal with the dynamic window planner.
    Dwa(DwaArgs),
    /// Plan on a PDDL domain and problem.
    Plan(PlanArgs),
    /// Execute a plan with simulated components and replanning.
    Exec(ExecArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioKind {
    Workstation,
    Rtt,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: ScenarioKind,
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SceneInput {
    /// Workstation scenario JSON; the cloud is generated from it.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Point cloud in PLY format.
    #[arg(long)]
    cloud: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PerceiveArgs {
    #[command(flatten)]
    input: SceneInput,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Segmentation settings JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PlaceArgs {
    #[command(flatten)]
    input: SceneInput,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Placement settings JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Arm chain JSON; defaults to the bundled 5-DOF arm.
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GraspArgs {
    #[command(flatten)]
    input: SceneInput,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Grasp settings JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    chain: Option<PathBuf>,
    /// Index of the object in perception order.
    #[arg(long, default_value_t = 0)]
    object: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RttArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = TrackerKind::Sort)]
    tracker: TrackerKind,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Tracker settings JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Metrics CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DwaArgs {
    /// Occupancy map in plain PGM.
    #[arg(long)]
    map: PathBuf,
    /// Map metadata JSON; defaults to the map path with a `.json` extension.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Episode JSON: start, goal and planner settings.
    #[arg(long)]
    scenario: PathBuf,
    /// Pose log CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Optimal,
    Greedy,
}

impl From<ModeArg> for PlanMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Optimal => PlanMode::Optimal,
            ModeArg::Greedy => PlanMode::Greedy,
        }
    }
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Greedy)]
    mode: ModeArg,
    /// Plan file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExecArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    /// Fault script JSON: `{"<step>": "e_failure", …}`.
    #[arg(long)]
    faults: Option<PathBuf>,
    /// Component bindings JSON; unlisted actions always succeed.
    #[arg(long)]
    bindings: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    max_replans: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Greedy)]
    mode: ModeArg,
    /// Execution trace, JSON Lines.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(kind: &'static str, e: impl Display) -> Self {
        Failure { kind, message: e.to_string() }
    }
}

fn fail(kind: &'static str) -> impl Fn(&dyn Display) -> Failure {
    move |e| Failure::new(kind, e)
}

type Outcome = Result<Value, Failure>;

/// Parses `argv` (program name first) and runs the subcommand. Returns 0 on
/// success, 1 on a pipeline error and 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Perceive(a) => perceive(a, exec),
        Command::Place(a) => place(a, exec),
        Command::Grasp(a) => grasp(a, exec),
        Command::Rtt(a) => rtt(a),
        Command::Dwa(a) => dwa(a, exec),
        Command::Plan(a) => plan_cmd(a),
        Command::Exec(a) => exec_cmd(a),
    };
    match result {
        Ok(summary) => {
            // a closed stdout (e.g. piped into `head`) is not a pipeline failure
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            let _ = writeln!(std::io::stdout(), "{text}");
            0
        }
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            1
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::new("input", format!("{}: {e}", path.display())))
}

fn read_json_or_default<T: DeserializeOwned + Default>(path: Option<&PathBuf>) -> Result<T, Failure> {
    path.map_or_else(|| Ok(T::default()), |p| read_json(p))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("outputs serialize")
}

fn workstation(path: &Path, seed: Option<u64>) -> Result<(PointCloud, WorkstationTruth), Failure> {
    let mut s: WorkstationScenario = read_json(path)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    gen_workstation(&s).map_err(|e| fail("sim")(&e))
}

fn load_scene(input: &SceneInput, seed: Option<u64>) -> Result<(PointCloud, Option<WorkstationTruth>), Failure> {
    match (&input.scenario, &input.cloud) {
        (Some(s), _) => workstation(s, seed).map(|(c, t)| (c, Some(t))),
        (None, Some(c)) => read_ply(&read(c)?).map(|c| (c, None)).map_err(|e| fail("cloud")(&e)),
        (None, None) => unreachable!("clap requires one input"),
    }
}

/// The chain and its IK seed: `q0` if given, else the ready pose of the
/// bundled arm or the joint-range midpoint of a custom one.
fn load_chain(path: Option<&PathBuf>, q0: Option<JointConfig>) -> Result<(KinematicChain, JointConfig), Failure> {
    let (chain, seed) = match path {
        Some(p) => {
            let c = KinematicChain::from_json(&read(p)?).map_err(|e| fail("grasp")(&e))?;
            let home = c.home();
            (c, home)
        }
        None => (KinematicChain::example(), EXAMPLE_READY),
    };
    Ok((chain, q0.unwrap_or(seed)))
}

/// Arm base standing on the support surface at the polygon's area
/// centroid, z along the plane normal.
fn default_base(polygon: &Polygon2) -> Pose {
    let (mut c, mut area2) = (nalgebra::Vector2::zeros(), 0.0);
    for (p, q) in polygon.edges() {
        let w = p.x * q.y - q.x * p.y;
        c += (p + q) * w;
        area2 += w;
    }
    let c = c / (3.0 * area2);
    let b = &polygon.basis;
    pose_from_parts(b.lift(&c), frame_from_z_x(&b.normal(), &b.u))
}

fn polygon_json(polygon: &Polygon2) -> Vec<[f64; 3]> {
    polygon.vertices.iter().map(|v| polygon.basis.lift(v)).map(|p| [p.x, p.y, p.z]).collect()
}

fn gen(a: GenArgs) -> Outcome {
    std::fs::create_dir_all(&a.out).map_err(|e| Failure::new("io", format!("{}: {e}", a.out.display())))?;
    match a.kind {
        ScenarioKind::Workstation => {
            let (cloud, truth) = workstation(&a.scenario, a.seed)?;
            write(&a.out.join("cloud.ply"), &write_ply(&cloud))?;
            write(&a.out.join("truth.json"), &truth.to_json())?;
            Ok(json!({ "points": cloud.len(), "objects": truth.objects.len() }))
        }
        ScenarioKind::Rtt => {
            let mut s: RttScenario = read_json(&a.scenario)?;
            if let Some(seed) = a.seed {
                s.seed = seed;
            }
            let st = gen_rtt_stream(&s).map_err(|e| fail("sim")(&e))?;
            write(&a.out.join("points.jsonl"), &to_jsonl(&st.points))?;
            write(&a.out.join("detections.jsonl"), &write_detections(&st.detections))?;
            write(&a.out.join("truth.jsonl"), &to_jsonl(&st.truth))?;
            Ok(json!({ "frames": s.frame_count(), "points": st.points.len(), "detections": st.detections.len() }))
        }
    }
}

fn perceive(a: PerceiveArgs, exec: Execution) -> Outcome {
    let (cloud, truth) = load_scene(&a.input, a.seed)?;
    let cfg: SceneConfig = read_json_or_default(a.config.as_ref())?;
    let seg = segment_scene(&cloud, &cfg, exec).map_err(|e| fail("cloud")(&e))?;
    let objects = recognize(&seg.cloud, &seg.clusters, None, None).map_err(|e| fail("recognition")(&e))?;
    let metrics = truth.map(|t| perception_metrics(&seg, &t));
    let out = json!({
        "plane": { "normal": [seg.plane.normal.x, seg.plane.normal.y, seg.plane.normal.z], "offset": seg.plane.offset, "inliers": seg.plane.inliers.len() },
        "polygon": polygon_json(&seg.polygon),
        "objects": objects,
        "metrics": metrics,
    });
    write(&a.out, &serde_json::to_string_pretty(&out).expect("serializes"))?;
    Ok(json!({ "objects": objects.len(), "metrics": metrics }))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PlaceSettings {
    placement: PlacementConfig,
    /// Defaults to the support polygon centroid.
    arm_base: Option<PoseJson>,
    q0: Option<JointConfig>,
}

fn place(a: PlaceArgs, exec: Execution) -> Outcome {
    let (cloud, _) = load_scene(&a.input, a.seed)?;
    let s: PlaceSettings = read_json_or_default(a.config.as_ref())?;
    let (chain, q0) = load_chain(a.chain.as_ref(), s.q0)?;
    let p = &s.placement;
    let placement = |e: &dyn Display| Failure::new("placement", e);
    let model = workstation_model(&cloud, &p.scene, exec).map_err(|e| placement(&e))?;
    let candidates =
        sample_placements(&model.polygon, &model.obstacles, p.d_min, p.footprint, p.n, p.seed, p.max_attempts)
            .map_err(|e| placement(&e))?;
    let base = s.arm_base.map_or_else(|| default_base(&model.polygon), Pose::from);
    let ranked =
        rank_placements(&chain, &base, &candidates, &q0, p.release_height, &p.ik, exec).map_err(|e| placement(&e))?;
    let out = json!({
        "polygon": polygon_json(&model.polygon),
        "obstacles": model.obstacles,
        "arm_base": PoseJson::from(&base),
        "placements": ranked,
    });
    write(&a.out, &serde_json::to_string_pretty(&out).expect("serializes"))?;
    Ok(json!({ "candidates": ranked.len(), "best": ranked.first() }))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GraspSettings {
    scene: SceneConfig,
    grasp: GraspConfig,
    arm_base: Option<PoseJson>,
    q0: Option<JointConfig>,
}

fn grasp(a: GraspArgs, exec: Execution) -> Outcome {
    let (cloud, _) = load_scene(&a.input, a.seed)?;
    let s: GraspSettings = read_json_or_default(a.config.as_ref())?;
    let (mut chain, mut q0) = load_chain(a.chain.as_ref(), s.q0)?;
    let seg = segment_scene(&cloud, &s.scene, exec).map_err(|e| fail("cloud")(&e))?;
    let cluster = seg.clusters.get(a.object).ok_or_else(|| {
        Failure::new("grasp", format!("object {} requested, {} perceived", a.object, seg.clusters.len()))
    })?;
    let (pose, extents) = pca_pose(&seg.cloud, cluster).map_err(|e| fail("recognition")(&e))?;
    let height = cluster.indices.iter().map(|&i| seg.plane.signed_distance(&seg.cloud.points()[i])).fold(0.0, f64::max);
    let g = &s.grasp;
    let approach = decide_approach(height, g.vertical_threshold);
    chain.base = s.arm_base.map_or_else(|| default_base(&seg.polygon), Pose::from);
    let base_point = Point3::from(chain.base.translation.vector);
    if s.q0.is_none() {
        // turn the seed's base yaw toward the object
        let local = chain.base.inverse() * Point3::from(pose.translation.vector);
        let j = &chain.joints()[0];
        q0.0[0] = local.y.atan2(local.x).clamp(j.lo, j.hi);
    }
    let candidates = sample_pregrasp(&pose, approach, g.offset, g.samples, g.yaw_spread, &base_point);
    let (best, sol) = select_reachable(&chain, &candidates, &q0, &g.ik, exec).map_err(|e| fail("grasp")(&e))?;
    let out = json!({
        "object": a.object,
        "object_pose": PoseJson::from(&pose),
        "extents": extents,
        "object_height": height,
        "arm_base": PoseJson::from(&chain.base),
        "candidate": best,
        "solution": sol,
    });
    write(&a.out, &serde_json::to_string_pretty(&out).expect("serializes"))?;
    Ok(json!({ "approach": best.approach, "yaw": best.yaw, "iterations": sol.iterations }))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrackerSettings {
    sort: SortConfig,
    nn: NnParams,
}

fn rtt(a: RttArgs) -> Outcome {
    let mut s: RttScenario = read_json(&a.scenario)?;
    if let Some(seed) = a.seed {
        s.seed = seed;
    }
    let cfg: TrackerSettings = read_json_or_default(a.config.as_ref())?;
    let stream = gen_rtt_stream(&s).map_err(|e| fail("sim")(&e))?;
    let ev = evaluate_rtt(&s, &stream, a.tracker, &cfg.sort, &cfg.nn).map_err(|e| fail("tracking")(&e))?;
    write(&a.out, &ev.metrics.to_csv())?;
    Ok(to_value(&ev.metrics))
}

fn default_max_steps() -> usize {
    150
}

fn default_goal_tol() -> f64 {
    0.2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DwaScenario {
    /// `[x, y, theta]`, at rest.
    start: [f64; 3],
    goal: [f64; 2],
    #[serde(default)]
    config: DwaConfig,
    #[serde(default = "default_max_steps")]
    max_steps: usize,
    #[serde(default = "default_goal_tol")]
    goal_tol: f64,
}

fn dwa(a: DwaArgs, exec: Execution) -> Outcome {
    let meta_path = a.meta.clone().unwrap_or_else(|| a.map.with_extension("json"));
    let meta: GridMeta = read_json(&meta_path)?;
    let grid = OccupancyGrid::from_pgm(&read(&a.map)?, meta).map_err(|e| fail("nav")(&e))?;
    let s: DwaScenario = read_json(&a.scenario)?;
    let start = RobotState::at_rest(s.start[0], s.start[1], s.start[2]);
    let ep =
        run_episode(start, s.goal, &grid, &s.config, s.max_steps, s.goal_tol, exec).map_err(|e| fail("nav")(&e))?;
    write(&a.out, &write_pose_log(&ep, s.config.dt))?;
    let last = ep.states.last().expect("episode has a start state");
    Ok(json!({
        "outcome": ep.outcome,
        "steps": ep.commands.len(),
        "goal_distance": (last.x - s.goal[0]).hypot(last.y - s.goal[1]),
    }))
}

fn plan_cmd(a: PlanArgs) -> Outcome {
    let planning = |e: &dyn Display| Failure::new("plan", e);
    let domain = parse_domain(&read(&a.domain)?).map_err(|e| planning(&e))?;
    let problem = parse_problem(&read(&a.problem)?, &domain).map_err(|e| planning(&e))?;
    let p = plan(&domain, &problem, a.mode.into()).map_err(|e| planning(&e))?;
    let v = validate(&domain, &problem, &p.steps);
    if !v.valid {
        return Err(Failure::new("plan", format!("produced plan fails validation: {:?}", v.failure)));
    }
    write(&a.out, &write_plan(&p))?;
    Ok(json!({ "steps": p.steps.len(), "cost": p.cost }))
}

fn exec_cmd(a: ExecArgs) -> Outcome {
    let planning = |e: &dyn Display| Failure::new("plan", e);
    let domain = parse_domain(&read(&a.domain)?).map_err(|e| planning(&e))?;
    let problem = parse_problem(&read(&a.problem)?, &domain).map_err(|e| planning(&e))?;
    let faults = match &a.faults {
        Some(p) => parse_fault_script(&read(p)?).map_err(|e| fail("exec")(&e))?,
        None => Default::default(),
    };
    let mut bindings = match &a.bindings {
        Some(p) => Bindings::from_json(&domain, &read(p)?).map_err(|e| fail("exec")(&e))?,
        None => Bindings::all_succeed(&domain),
    };
    let cfg = ExecConfig { mode: a.mode.into(), max_replans: a.max_replans };
    let trace = execute(&domain, &problem, &mut bindings, &faults, &cfg).map_err(|e| fail("exec")(&e))?;
    write(&a.out, &trace.to_jsonl())?;
    Ok(json!({
        "outcome": trace.outcome,
        "steps": trace.records.len(),
        "replans": trace.replans,
        "plan_attempts": trace.plan_attempts,
        "cost": trace.final_kb.cost,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector3;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["workcell", "fly"]), 2);
        assert_eq!(run(["workcell", "plan", "--domain", "d.pddl"]), 2);
        assert_eq!(run(["workcell", "rtt", "--scenario", "s.json", "--tracker", "kalman", "--out", "m.csv"]), 2);
        assert_eq!(run(["workcell", "--help"]), 0);
    }

    #[test]
    fn missing_file_is_pipeline_error() {
        assert_eq!(run(["workcell", "plan", "--domain", "/nonexistent/d.pddl", "--problem", "p", "--out", "o"]), 1);
    }

    #[test]
    fn default_base_sits_on_plane() {
        let basis = crate::cloud::PlaneBasis::for_plane(&Vector3::z(), Point3::new(0.0, 0.0, 0.7));
        let v = |x, y| nalgebra::Vector2::new(x, y);
        let poly = Polygon2 { vertices: vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0)], basis };
        let b = default_base(&poly);
        assert!((b.translation.vector - Vector3::new(0.5, 0.5, 0.7)).norm() < 1e-12);
        assert!((b.rotation * Vector3::z() - Vector3::z()).norm() < 1e-12);
    }
}
