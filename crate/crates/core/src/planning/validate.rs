use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::pddl::{AtomExpr, CostExpr, DomainDef, ProblemDef};
use super::search::PlanStep;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ValidationFailure {
    /// Unknown action name, wrong argument count, or badly typed argument.
    BadStep(usize),
    Precondition(usize),
    Goal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub valid: bool,
    pub failure: Option<ValidationFailure>,
    /// Cost of the prefix that was simulated.
    pub cost: f64,
}

/// A schema applied to concrete arguments, straight from the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub pre_pos: Vec<AtomExpr>,
    pub pre_neg: Vec<AtomExpr>,
    pub add: Vec<AtomExpr>,
    pub delete: Vec<AtomExpr>,
    /// `None` when the cost function has no value for these arguments.
    pub cost: Option<f64>,
}

/// `None` if the action is unknown or the arguments do not fit its parameters.
pub fn instantiate(domain: &DomainDef, problem: &ProblemDef, action: &str, args: &[String]) -> Option<Instance> {
    let schema = domain.action(action)?;
    if schema.params.len() != args.len() {
        return None;
    }
    let mut map: HashMap<&str, &str> = HashMap::new();
    for (p, a) in schema.params.iter().zip(args) {
        let obj = problem.all_objects(domain).find(|o| o.name == *a)?;
        if !domain.is_subtype(&obj.ty, &p.ty) {
            return None;
        }
        map.insert(p.name.as_str(), a.as_str());
    }
    let sub = |x: &AtomExpr| AtomExpr {
        pred: x.pred.clone(),
        args: x.args.iter().map(|t| map.get(t.as_str()).map_or_else(|| t.clone(), |s| s.to_string())).collect(),
    };
    let cost = if !domain.uses_action_costs() {
        Some(1.0)
    } else {
        match &schema.cost {
            None => Some(0.0),
            Some(CostExpr::Const(c)) => Some(*c),
            Some(CostExpr::Function(f)) => problem.numeric.get(&sub(f)).copied(),
        }
    };
    Some(Instance {
        pre_pos: schema.precondition.iter().filter(|l| l.positive).map(|l| sub(&l.atom)).collect(),
        pre_neg: schema.precondition.iter().filter(|l| !l.positive).map(|l| sub(&l.atom)).collect(),
        add: schema.add.iter().map(sub).collect(),
        delete: schema.delete.iter().map(sub).collect(),
        cost,
    })
}

/// Simulates `steps` from the initial state, stopping at the first failure.
pub fn validate(domain: &DomainDef, problem: &ProblemDef, steps: &[PlanStep]) -> Validation {
    let mut facts: BTreeSet<AtomExpr> = problem.init.clone();
    let mut cost = 0.0;
    let fail = |f, cost| Validation { valid: false, failure: Some(f), cost };
    for (i, s) in steps.iter().enumerate() {
        let Some(inst) = instantiate(domain, problem, &s.action, &s.args) else {
            return fail(ValidationFailure::BadStep(i), cost);
        };
        let Some(c) = inst.cost else {
            return fail(ValidationFailure::BadStep(i), cost);
        };
        if !inst.pre_pos.iter().all(|x| facts.contains(x)) || inst.pre_neg.iter().any(|x| facts.contains(x)) {
            return fail(ValidationFailure::Precondition(i), cost);
        }
        for x in &inst.delete {
            facts.remove(x);
        }
        facts.extend(inst.add);
        cost += c;
    }
    if problem.goal.iter().all(|g| facts.contains(g)) {
        Validation { valid: true, failure: None, cost }
    } else {
        fail(ValidationFailure::Goal, cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::{ground, parse_domain, parse_problem, plan, PlanMode, TRANSPORT_DOMAIN, TRANSPORT_ONE};

    #[test]
    fn swapped_steps_fail_at_that_step() {
        let d = parse_domain(TRANSPORT_DOMAIN).unwrap();
        let p = parse_problem(TRANSPORT_ONE, &d).unwrap();
        let mut steps = plan(&d, &p, PlanMode::Optimal).unwrap().steps;
        steps.swap(1, 2);
        assert_eq!(validate(&d, &p, &steps).failure, Some(ValidationFailure::Precondition(1)));
    }

    #[test]
    fn empty_plan_fails_at_goal() {
        let d = parse_domain(TRANSPORT_DOMAIN).unwrap();
        let p = parse_problem(TRANSPORT_ONE, &d).unwrap();
        let v = validate(&d, &p, &[]);
        assert!(!v.valid);
        assert_eq!(v.failure, Some(ValidationFailure::Goal));
    }

    #[test]
    fn unknown_action_is_a_bad_step() {
        let d = parse_domain(TRANSPORT_DOMAIN).unwrap();
        let p = parse_problem(TRANSPORT_ONE, &d).unwrap();
        let s = [PlanStep { action: "fly".into(), args: vec![] }];
        assert_eq!(validate(&d, &p, &s).failure, Some(ValidationFailure::BadStep(0)));
    }

    #[test]
    fn hand_written_plan_uses_ground_actions() {
        let d = parse_domain(TRANSPORT_DOMAIN).unwrap();
        let p = parse_problem(TRANSPORT_ONE, &d).unwrap();
        let g = ground(&d, &p);
        let steps: Vec<PlanStep> = [
            ("move", vec!["ws2", "ws1"]),
            ("perceive", vec!["box1", "ws1"]),
            ("grasp", vec!["box1", "ws1"]),
            ("move", vec!["ws1", "ws2"]),
            ("place", vec!["box1", "ws2"]),
        ]
        .into_iter()
        .map(|(a, args)| PlanStep { action: a.into(), args: args.into_iter().map(String::from).collect() })
        .collect();
        assert!(validate(&d, &p, &steps).valid);
        for s in &steps {
            assert!(g.iter().any(|a| a.schema == s.action && a.args == s.args));
        }
    }
}
