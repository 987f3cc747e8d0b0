use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ground::{Bits, State, Task};
use super::pddl::{DomainDef, ProblemDef};
use super::PlanError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    /// Uniform-cost search: minimal total cost.
    Optimal,
    /// Greedy best-first on the number of unsatisfied goal atoms.
    #[default]
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: String,
    pub args: Vec<String>,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.action)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64, u64);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

struct Node {
    bits: Bits,
    parent: Option<(usize, usize)>,
    g: f64,
}

pub fn plan(domain: &DomainDef, problem: &ProblemDef, mode: PlanMode) -> Result<Plan, PlanError> {
    let task = Task::new(domain, problem);
    task.plan_from(&task.initial_state(), mode)
}

impl Task {
    /// Forward search from `start`. Successors are generated in ground-action
    /// order and equal keys pop in insertion order, so results are
    /// deterministic.
    pub fn plan_from(&self, start: &State, mode: PlanMode) -> Result<Plan, PlanError> {
        let goal = self.goal_bits();
        let unsatisfied = |b: &Bits| goal.iter().filter(|&&i| !b.get(i)).count();
        let mut nodes = vec![Node { bits: self.to_bits(start), parent: None, g: 0.0 }];
        let mut best: HashMap<Bits, f64> = HashMap::new();
        best.insert(nodes[0].bits.clone(), 0.0);
        let mut heap = BinaryHeap::new();
        let mut counter = 0u64;
        let priority = |n: &Node| match mode {
            PlanMode::Optimal => n.g,
            PlanMode::Greedy => unsatisfied(&n.bits) as f64,
        };
        heap.push(Reverse((Key(priority(&nodes[0]), counter), 0usize)));
        while let Some(Reverse((_, id))) = heap.pop() {
            if mode == PlanMode::Optimal && nodes[id].g > best[&nodes[id].bits] {
                continue;
            }
            if unsatisfied(&nodes[id].bits) == 0 {
                return Ok(self.extract(&nodes, id));
            }
            for a in 0..self.actions().len() {
                if !self.applicable_bits(&nodes[id].bits, a) {
                    continue;
                }
                let bits = self.apply_bits(&nodes[id].bits, a);
                let g = nodes[id].g + self.actions()[a].cost;
                let improves = match (mode, best.get(&bits)) {
                    (_, None) => true,
                    (PlanMode::Optimal, Some(&old)) => g < old,
                    (PlanMode::Greedy, Some(_)) => false,
                };
                if !improves {
                    continue;
                }
                best.insert(bits.clone(), g);
                nodes.push(Node { bits, parent: Some((id, a)), g });
                counter += 1;
                let n = nodes.len() - 1;
                heap.push(Reverse((Key(priority(&nodes[n]), counter), n)));
            }
        }
        Err(PlanError::Unsolvable)
    }

    fn extract(&self, nodes: &[Node], mut id: usize) -> Plan {
        let cost = nodes[id].g;
        let mut steps = Vec::new();
        while let Some((p, a)) = nodes[id].parent {
            let act = &self.actions()[a];
            steps.push(PlanStep { action: act.schema.clone(), args: act.args.clone() });
            id = p;
        }
        steps.reverse();
        Plan { steps, cost }
    }
}
