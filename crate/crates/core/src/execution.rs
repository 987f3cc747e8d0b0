//! Command-in/status-out component protocol and a plan executor that
//! replans from its knowledge base whenever an action fails.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planning::{parse_sexpr, AtomExpr, DomainDef, GroundAction, PlanError, PlanMode, ProblemDef, State, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentEvent {
    #[serde(rename = "e_start")]
    Start,
    #[serde(rename = "e_stop")]
    Stop,
    #[serde(rename = "e_trigger")]
    Trigger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentStatus {
    #[serde(rename = "e_success")]
    Success,
    #[serde(rename = "e_failure")]
    Failure,
    #[serde(rename = "e_stopped")]
    Stopped,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error("binding for `{binding}` cannot run action `{action}`")]
    UnknownAction { binding: String, action: String },
    #[error("no binding for action `{0}`")]
    MissingBinding(String),
    #[error("binding for undeclared action `{0}`")]
    UnboundAction(String),
    #[error("invalid binding: {0}")]
    InvalidBinding(String),
    #[error("fault script: {0}")]
    FaultScript(String),
}

/// Deterministic component behavior, indexed by how many runs it has done.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    AlwaysSucceed,
    AlwaysFail,
    /// Fails the first `n` runs, then succeeds.
    FailFirst(u32),
    /// Status of run `k` is `script[k]`; runs past the end succeed.
    Script(Vec<ComponentStatus>),
}

impl Behavior {
    fn status(&self, run: u32) -> ComponentStatus {
        match self {
            Behavior::AlwaysSucceed => ComponentStatus::Success,
            Behavior::AlwaysFail => ComponentStatus::Failure,
            Behavior::FailFirst(n) if run < *n => ComponentStatus::Failure,
            Behavior::FailFirst(_) => ComponentStatus::Success,
            Behavior::Script(s) => s.get(run as usize).copied().unwrap_or(ComponentStatus::Success),
        }
    }
}

/// Component behind one domain action. Failure effects are atoms over the
/// action's parameters, applied when a run fails.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionBinding {
    pub action: String,
    pub behavior: Behavior,
    pub failure_add: Vec<AtomExpr>,
    pub failure_delete: Vec<AtomExpr>,
    runs: u32,
}

impl ActionBinding {
    pub fn new(action: impl Into<String>, behavior: Behavior) -> Self {
        ActionBinding { action: action.into(), behavior, failure_add: Vec::new(), failure_delete: Vec::new(), runs: 0 }
    }

    pub fn with_failure_effects(mut self, add: Vec<AtomExpr>, delete: Vec<AtomExpr>) -> Self {
        self.failure_add = add;
        self.failure_delete = delete;
        self
    }

    pub fn runs(&self) -> u32 {
        self.runs
    }
}

fn bind(atom: &AtomExpr, params: &[String], args: &[String]) -> AtomExpr {
    AtomExpr {
        pred: atom.pred.clone(),
        args: atom
            .args
            .iter()
            .map(|t| params.iter().position(|p| p == t).map_or_else(|| t.clone(), |i| args[i].clone()))
            .collect(),
    }
}

/// One command to a component. Start and trigger both run the behavior to
/// completion; stop answers `e_stopped` without touching the knowledge base.
/// `params` are the schema's parameter names, used to bind failure effects.
pub fn component_step(
    binding: &mut ActionBinding,
    action: &GroundAction,
    params: &[String],
    event: ComponentEvent,
    kb: &State,
) -> Result<(ComponentStatus, State), ExecError> {
    if binding.action != action.schema {
        return Err(ExecError::UnknownAction { binding: binding.action.clone(), action: action.schema.clone() });
    }
    if event == ComponentEvent::Stop {
        return Ok((ComponentStatus::Stopped, kb.clone()));
    }
    let status = binding.behavior.status(binding.runs);
    binding.runs += 1;
    Ok((status, effect_of(binding, action, params, status, kb)))
}

fn effect_of(
    binding: &ActionBinding,
    action: &GroundAction,
    params: &[String],
    status: ComponentStatus,
    kb: &State,
) -> State {
    let mut next = kb.clone();
    match status {
        ComponentStatus::Success => {
            for d in &action.delete {
                next.facts.remove(d);
            }
            next.facts.extend(action.add.iter().cloned());
            next.cost += action.cost;
        }
        ComponentStatus::Failure => {
            for d in &binding.failure_delete {
                next.facts.remove(&bind(d, params, &action.args));
            }
            next.facts.extend(binding.failure_add.iter().map(|a| bind(a, params, &action.args)));
        }
        ComponentStatus::Stopped => {}
    }
    next
}

/// Exactly one binding per domain action.
#[derive(Debug, Clone, PartialEq)]
pub struct Bindings(BTreeMap<String, ActionBinding>);

impl Bindings {
    pub fn all_succeed(domain: &DomainDef) -> Self {
        Bindings(
            domain
                .actions
                .iter()
                .map(|a| (a.name.clone(), ActionBinding::new(&a.name, Behavior::AlwaysSucceed)))
                .collect(),
        )
    }

    pub fn new(domain: &DomainDef, bindings: Vec<ActionBinding>) -> Result<Self, ExecError> {
        let mut map = BTreeMap::new();
        for b in bindings {
            if domain.action(&b.action).is_none() {
                return Err(ExecError::UnboundAction(b.action));
            }
            if map.insert(b.action.clone(), b.clone()).is_some() {
                return Err(ExecError::InvalidBinding(format!("two bindings for `{}`", b.action)));
            }
        }
        if let Some(a) = domain.actions.iter().find(|a| !map.contains_key(&a.name)) {
            return Err(ExecError::MissingBinding(a.name.clone()));
        }
        Ok(Bindings(map))
    }

    /// Replaces the binding of one action.
    pub fn set(&mut self, b: ActionBinding) -> Result<(), ExecError> {
        match self.0.get_mut(&b.action) {
            Some(slot) => {
                *slot = b;
                Ok(())
            }
            None => Err(ExecError::UnboundAction(b.action)),
        }
    }

    pub fn get(&self, action: &str) -> Option<&ActionBinding> {
        self.0.get(action)
    }

    /// JSON object `{action: {"behavior": …, "failure_add": ["(p ?x)"], "failure_delete": […]}}`;
    /// actions not listed always succeed.
    pub fn from_json(domain: &DomainDef, text: &str) -> Result<Self, ExecError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Spec {
            behavior: Behavior,
            #[serde(default)]
            failure_add: Vec<String>,
            #[serde(default)]
            failure_delete: Vec<String>,
        }
        let specs: BTreeMap<String, Spec> =
            serde_json::from_str(text).map_err(|e| ExecError::InvalidBinding(e.to_string()))?;
        let mut out = Bindings::all_succeed(domain);
        for (action, s) in specs {
            let atoms = |v: &[String]| -> Result<Vec<AtomExpr>, ExecError> {
                v.iter()
                    .map(|t| parse_atom(t).ok_or_else(|| ExecError::InvalidBinding(format!("bad atom `{t}`"))))
                    .collect()
            };
            let b = ActionBinding::new(&action, s.behavior)
                .with_failure_effects(atoms(&s.failure_add)?, atoms(&s.failure_delete)?);
            out.set(b)?;
        }
        Ok(out)
    }
}

fn parse_atom(text: &str) -> Option<AtomExpr> {
    let e = parse_sexpr(text).ok()?;
    let items = e.list()?;
    let pred = items.first()?.atom()?.to_string();
    let args = items[1..].iter().map(|a| a.atom().map(str::to_string)).collect::<Option<_>>()?;
    Some(AtomExpr { pred, args })
}

/// Forced statuses keyed by global step index (0-based across replans).
pub fn parse_fault_script(text: &str) -> Result<BTreeMap<usize, ComponentStatus>, ExecError> {
    let raw: BTreeMap<String, ComponentStatus> =
        serde_json::from_str(text).map_err(|e| ExecError::FaultScript(e.to_string()))?;
    raw.into_iter()
        .map(|(k, v)| k.parse().map(|i| (i, v)).map_err(|_| ExecError::FaultScript(format!("bad step index `{k}`"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    ReplanBudgetExhausted,
    Unsolvable,
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub step: usize,
    pub action: String,
    pub status: ComponentStatus,
    pub kb_size: usize,
    pub replans: usize,
    /// Knowledge base after the step.
    pub kb: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    pub records: Vec<TraceRecord>,
    pub outcome: Outcome,
    pub plan_attempts: usize,
    pub replans: usize,
    pub final_kb: State,
}

impl ExecutionTrace {
    /// One JSON record per line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let _ = writeln!(s, "{}", serde_json::to_string(r).expect("trace records serialize"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecConfig {
    pub mode: PlanMode,
    pub max_replans: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig { mode: PlanMode::Greedy, max_replans: 3 }
    }
}

/// Plan, run each step through its component, and replan from the current
/// knowledge base after every failure until the goal holds, the replan budget
/// is spent, or no plan exists.
pub fn execute(
    domain: &DomainDef,
    problem: &ProblemDef,
    bindings: &mut Bindings,
    fault_script: &BTreeMap<usize, ComponentStatus>,
    cfg: &ExecConfig,
) -> Result<ExecutionTrace, ExecError> {
    let task = Task::new(domain, problem);
    let mut kb = task.initial_state();
    let mut records = Vec::new();
    let mut replans = 0;
    let mut attempts = 0;
    let mut step = 0;
    let finish = |records, outcome, attempts, replans, kb| {
        Ok(ExecutionTrace { records, outcome, plan_attempts: attempts, replans, final_kb: kb })
    };
    loop {
        if task.goal_satisfied(&kb) {
            return finish(records, Outcome::Success, attempts, replans, kb);
        }
        attempts += 1;
        let plan = match task.plan_from(&kb, cfg.mode) {
            Ok(p) => p,
            Err(PlanError::Unsolvable) => return finish(records, Outcome::Unsolvable, attempts, replans, kb),
            Err(e) => return Err(ExecError::InvalidBinding(e.to_string())),
        };
        for ps in &plan.steps {
            let idx = task.find(&ps.action, &ps.args).expect("planner returns ground actions of the task");
            let action = &task.actions()[idx];
            let schema = domain.action(&action.schema).expect("ground action has a schema");
            let params: Vec<String> = schema.params.iter().map(|p| p.name.clone()).collect();
            let binding =
                bindings.0.get_mut(&action.schema).ok_or_else(|| ExecError::MissingBinding(action.schema.clone()))?;
            let (status, next) = match fault_script.get(&step) {
                Some(&forced) => (forced, effect_of(binding, action, &params, forced, &kb)),
                None => component_step(binding, action, &params, ComponentEvent::Trigger, &kb)?,
            };
            kb = next;
            if status == ComponentStatus::Failure {
                replans += 1;
            }
            records.push(TraceRecord {
                step,
                action: action.name(),
                status,
                kb_size: kb.facts.len(),
                replans,
                kb: kb.facts.iter().map(ToString::to_string).collect(),
            });
            step += 1;
            match status {
                ComponentStatus::Success => {}
                ComponentStatus::Stopped => return finish(records, Outcome::Stopped, attempts, replans, kb),
                ComponentStatus::Failure if replans > cfg.max_replans => {
                    return finish(records, Outcome::ReplanBudgetExhausted, attempts, replans, kb);
                }
                ComponentStatus::Failure => break,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::{
        parse_domain, parse_problem, validate, PlanStep, TRANSPORT_DOMAIN, TRANSPORT_ONE, TRANSPORT_THREE,
    };
    use std::collections::BTreeSet;

    fn setup() -> (DomainDef, ProblemDef) {
        let d = parse_domain(TRANSPORT_DOMAIN).unwrap();
        let p = parse_problem(TRANSPORT_ONE, &d).unwrap();
        (d, p)
    }

    fn grasp_action(d: &DomainDef, p: &ProblemDef) -> GroundAction {
        let t = Task::new(d, p);
        let i = t.find("grasp", &["box1".into(), "ws1".into()]).unwrap();
        t.actions()[i].clone()
    }

    fn params(d: &DomainDef, a: &str) -> Vec<String> {
        d.action(a).unwrap().params.iter().map(|p| p.name.clone()).collect()
    }

    #[test]
    fn stop_leaves_kb_unchanged() {
        let (d, p) = setup();
        let a = grasp_action(&d, &p);
        let kb = Task::new(&d, &p).initial_state();
        for behavior in [Behavior::AlwaysSucceed, Behavior::AlwaysFail] {
            let mut b = ActionBinding::new("grasp", behavior);
            let (s, k) = component_step(&mut b, &a, &params(&d, "grasp"), ComponentEvent::Stop, &kb).unwrap();
            assert_eq!(s, ComponentStatus::Stopped);
            assert_eq!(k, kb);
        }
    }

    #[test]
    fn trigger_applies_effects() {
        let (d, p) = setup();
        let a = grasp_action(&d, &p);
        let kb = State { facts: a.pre_pos.iter().cloned().collect(), cost: 0.0 };
        let mut b = ActionBinding::new("grasp", Behavior::AlwaysSucceed);
        let (s, k) = component_step(&mut b, &a, &params(&d, "grasp"), ComponentEvent::Trigger, &kb).unwrap();
        assert_eq!(s, ComponentStatus::Success);
        let mut expect: BTreeSet<AtomExpr> = kb.facts.clone();
        for x in &a.delete {
            expect.remove(x);
        }
        expect.extend(a.add.iter().cloned());
        assert_eq!(k.facts, expect);
        let mut wrong = ActionBinding::new("place", Behavior::AlwaysSucceed);
        assert!(matches!(
            component_step(&mut wrong, &a, &[], ComponentEvent::Trigger, &kb),
            Err(ExecError::UnknownAction { .. })
        ));
    }

    #[test]
    fn fail_once_then_succeed() {
        let (d, p) = setup();
        let a = grasp_action(&d, &p);
        let kb = State::default();
        let mut b = ActionBinding::new("grasp", Behavior::FailFirst(1));
        let prm = params(&d, "grasp");
        assert_eq!(component_step(&mut b, &a, &prm, ComponentEvent::Trigger, &kb).unwrap().0, ComponentStatus::Failure);
        assert_eq!(component_step(&mut b, &a, &prm, ComponentEvent::Trigger, &kb).unwrap().0, ComponentStatus::Success);
    }

    /// Each record's kb differs from the previous one exactly by the step's
    /// declared effects.
    fn assert_frame(d: &DomainDef, p: &ProblemDef, bindings: &Bindings, trace: &ExecutionTrace) {
        let task = Task::new(d, p);
        let mut prev: BTreeSet<String> = task.initial_state().facts.iter().map(ToString::to_string).collect();
        for r in &trace.records {
            let cur: BTreeSet<String> = r.kb.iter().cloned().collect();
            let a = task.actions().iter().find(|a| a.name() == r.action).unwrap();
            let prm = params(d, &a.schema);
            let b = bindings.get(&a.schema).unwrap();
            let (add, del): (Vec<AtomExpr>, Vec<AtomExpr>) = match r.status {
                ComponentStatus::Success => (a.add.clone(), a.delete.clone()),
                ComponentStatus::Failure => (
                    b.failure_add.iter().map(|x| bind(x, &prm, &a.args)).collect(),
                    b.failure_delete.iter().map(|x| bind(x, &prm, &a.args)).collect(),
                ),
                ComponentStatus::Stopped => (vec![], vec![]),
            };
            let mut expect = prev.clone();
            for x in &del {
                expect.remove(&x.to_string());
            }
            expect.extend(add.iter().map(ToString::to_string));
            assert_eq!(cur, expect, "step {}", r.step);
            assert_eq!(r.kb_size, cur.len());
            prev = cur;
        }
    }

    #[test]
    fn all_succeed_five_steps() {
        let (d, p) = setup();
        let mut b = Bindings::all_succeed(&d);
        let t = execute(&d, &p, &mut b, &BTreeMap::new(), &ExecConfig::default()).unwrap();
        assert_eq!(t.outcome, Outcome::Success);
        assert_eq!(t.records.len(), 5);
        assert_eq!(t.replans, 0);
        assert!(p.goal.iter().all(|g| t.final_kb.holds(g)));
        assert_frame(&d, &p, &b, &t);
    }

    #[test]
    fn grasp_fails_once() {
        let (d, p) = setup();
        let mut b = Bindings::all_succeed(&d);
        b.set(ActionBinding::new("grasp", Behavior::FailFirst(1))).unwrap();
        let t = execute(&d, &p, &mut b, &BTreeMap::new(), &ExecConfig::default()).unwrap();
        assert_eq!(t.outcome, Outcome::Success);
        assert_eq!(t.replans, 1);
        assert_eq!(t.plan_attempts, 2);
        let failures = t.records.iter().filter(|r| r.status == ComponentStatus::Failure).count();
        assert_eq!(failures, t.replans);
        // the successful steps alone form a valid plan
        let ok: Vec<PlanStep> = t
            .records
            .iter()
            .filter(|r| r.status == ComponentStatus::Success)
            .map(|r| {
                let a = Task::new(&d, &p).actions().iter().find(|a| a.name() == r.action).unwrap().clone();
                PlanStep { action: a.schema, args: a.args }
            })
            .collect();
        assert!(validate(&d, &p, &ok).valid);
        assert_frame(&d, &p, &b, &t);
    }

    #[test]
    fn failure_effects_force_re_perception() {
        let (d, p) = setup();
        let mut b = Bindings::all_succeed(&d);
        let lost = AtomExpr { pred: "perceived".into(), args: vec!["?i".into()] };
        b.set(ActionBinding::new("grasp", Behavior::FailFirst(1)).with_failure_effects(vec![], vec![lost])).unwrap();
        let t = execute(&d, &p, &mut b, &BTreeMap::new(), &ExecConfig::default()).unwrap();
        assert_eq!(t.outcome, Outcome::Success);
        let names: Vec<&str> = t.records.iter().map(|r| r.action.split_whitespace().next().unwrap()).collect();
        assert_eq!(names, ["(move", "(perceive", "(grasp", "(perceive", "(grasp", "(move", "(place"]);
        assert_frame(&d, &p, &b, &t);
    }

    #[test]
    fn always_failing_grasp_exhausts_budget() {
        let (d, p) = setup();
        let mut b = Bindings::all_succeed(&d);
        b.set(ActionBinding::new("grasp", Behavior::AlwaysFail)).unwrap();
        let cfg = ExecConfig { max_replans: 3, ..Default::default() };
        let t = execute(&d, &p, &mut b, &BTreeMap::new(), &cfg).unwrap();
        assert_eq!(t.outcome, Outcome::ReplanBudgetExhausted);
        assert_eq!(t.plan_attempts, 4);
        assert!(t.records.windows(2).all(|w| w[0].replans <= w[1].replans));
        assert_frame(&d, &p, &b, &t);
    }

    #[test]
    fn fault_script_and_determinism() {
        let d = parse_domain(TRANSPORT_DOMAIN).unwrap();
        let p = parse_problem(TRANSPORT_THREE, &d).unwrap();
        let faults = parse_fault_script(r#"{"2": "e_failure", "7": "e_failure"}"#).unwrap();
        let run = || {
            let mut b = Bindings::all_succeed(&d);
            execute(&d, &p, &mut b, &faults, &ExecConfig::default()).unwrap()
        };
        let t = run();
        assert_eq!(t.outcome, Outcome::Success);
        assert_eq!(t.replans, 2);
        assert_eq!(t.records[2].status, ComponentStatus::Failure);
        assert_eq!(t.records[7].status, ComponentStatus::Failure);
        assert_eq!(t.to_jsonl(), run().to_jsonl());
        assert_frame(&d, &p, &Bindings::all_succeed(&d), &t);
    }

    #[test]
    fn stop_in_fault_script_halts() {
        let (d, p) = setup();
        let mut b = Bindings::all_succeed(&d);
        let faults = parse_fault_script(r#"{"1": "e_stopped"}"#).unwrap();
        let t = execute(&d, &p, &mut b, &faults, &ExecConfig::default()).unwrap();
        assert_eq!(t.outcome, Outcome::Stopped);
        assert_eq!(t.records.len(), 2);
    }

    #[test]
    fn bindings_cover_domain() {
        let (d, _) = setup();
        assert!(matches!(Bindings::new(&d, vec![]), Err(ExecError::MissingBinding(_))));
        let all: Vec<ActionBinding> =
            d.actions.iter().map(|a| ActionBinding::new(&a.name, Behavior::AlwaysSucceed)).collect();
        assert_eq!(Bindings::new(&d, all).unwrap(), Bindings::all_succeed(&d));
        let j = Bindings::from_json(
            &d,
            r#"{"grasp": {"behavior": {"fail_first": 2}, "failure_delete": ["(perceived ?i)"]}}"#,
        )
        .unwrap();
        assert_eq!(j.get("grasp").unwrap().behavior, Behavior::FailFirst(2));
        assert_eq!(j.get("grasp").unwrap().failure_delete.len(), 1);
        assert!(Bindings::from_json(&d, r#"{"fly": {"behavior": "always_fail"}}"#).is_err());
    }

    #[test]
    fn status_names() {
        assert_eq!(serde_json::to_string(&ComponentStatus::Failure).unwrap(), "\"e_failure\"");
        assert_eq!(serde_json::to_string(&ComponentEvent::Trigger).unwrap(), "\"e_trigger\"");
    }
}
