use std::collections::{BTreeSet, HashMap, HashSet};

use super::pddl::{AtomExpr, CostExpr, DomainDef, ProblemDef, TypedName};

/// Ground atoms as a bitset over the task's atom table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, v: bool) {
        if v {
            self.0[i / 64] |= 1 << (i % 64);
        } else {
            self.0[i / 64] &= !(1 << (i % 64));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<AtomExpr>,
    pub pre_neg: Vec<AtomExpr>,
    pub add: Vec<AtomExpr>,
    pub delete: Vec<AtomExpr>,
    pub cost: f64,
}

impl GroundAction {
    pub fn name(&self) -> String {
        AtomExpr { pred: self.schema.clone(), args: self.args.clone() }.to_string()
    }
}

/// Knowledge-base state: ground facts and accumulated cost.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct State {
    pub facts: BTreeSet<AtomExpr>,
    pub cost: f64,
}

impl State {
    pub fn holds(&self, a: &AtomExpr) -> bool {
        self.facts.contains(a)
    }
}

#[derive(Debug, Clone)]
struct CompiledAction {
    pre_pos: Vec<usize>,
    pre_neg: Vec<usize>,
    add: Vec<usize>,
    delete: Vec<usize>,
}

/// Grounded planning task.
#[derive(Debug, Clone)]
pub struct Task {
    atoms: Vec<AtomExpr>,
    index: HashMap<AtomExpr, usize>,
    actions: Vec<GroundAction>,
    compiled: Vec<CompiledAction>,
    init: State,
    goal: Vec<AtomExpr>,
}

fn substitute(a: &AtomExpr, binding: &HashMap<&str, &str>) -> AtomExpr {
    AtomExpr {
        pred: a.pred.clone(),
        args: a.args.iter().map(|t| binding.get(t.as_str()).map_or_else(|| t.clone(), |s| s.to_string())).collect(),
    }
}

fn objects_of<'a>(domain: &DomainDef, objects: &[&'a TypedName], ty: &str) -> Vec<&'a str> {
    objects.iter().filter(|o| domain.is_subtype(&o.ty, ty)).map(|o| o.name.as_str()).collect()
}

/// Every type-consistent binding of every schema, minus actions whose
/// positive precondition on a static predicate (one no action adds) is
/// false in the initial state, and actions whose cost function is undefined.
/// Sorted by `(schema, args)`.
pub fn ground(domain: &DomainDef, problem: &ProblemDef) -> Vec<GroundAction> {
    let objects: Vec<&TypedName> = problem.all_objects(domain).collect();
    let dynamic: HashSet<&str> = domain.actions.iter().flat_map(|a| a.add.iter().map(|x| x.pred.as_str())).collect();
    let mut out = Vec::new();
    for schema in &domain.actions {
        let domains: Vec<Vec<&str>> = schema.params.iter().map(|p| objects_of(domain, &objects, &p.ty)).collect();
        if domains.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0usize; domains.len()];
        'bindings: loop {
            let binding: HashMap<&str, &str> = schema
                .params
                .iter()
                .zip(&idx)
                .enumerate()
                .map(|(k, (p, &i))| (p.name.as_str(), domains[k][i]))
                .collect();
            let mut act = GroundAction {
                schema: schema.name.clone(),
                args: schema.params.iter().map(|p| binding[p.name.as_str()].to_string()).collect(),
                pre_pos: Vec::new(),
                pre_neg: Vec::new(),
                add: schema.add.iter().map(|a| substitute(a, &binding)).collect(),
                delete: schema.delete.iter().map(|a| substitute(a, &binding)).collect(),
                cost: 1.0,
            };
            let mut possible = true;
            for l in &schema.precondition {
                let g = substitute(&l.atom, &binding);
                if l.positive {
                    if !dynamic.contains(g.pred.as_str()) && !problem.init.contains(&g) {
                        possible = false;
                    }
                    act.pre_pos.push(g);
                } else {
                    act.pre_neg.push(g);
                }
            }
            if domain.uses_action_costs() {
                act.cost = match &schema.cost {
                    None => 0.0,
                    Some(CostExpr::Const(c)) => *c,
                    Some(CostExpr::Function(f)) => match problem.numeric.get(&substitute(f, &binding)) {
                        Some(v) => *v,
                        None => {
                            possible = false;
                            0.0
                        }
                    },
                };
            }
            if possible {
                out.push(act);
            }
            // advance the mixed-radix counter, last parameter fastest
            let mut k = idx.len();
            loop {
                if k == 0 {
                    break 'bindings;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < domains[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    out.sort_by(|a, b| (&a.schema, &a.args).cmp(&(&b.schema, &b.args)));
    out
}

impl Task {
    pub fn new(domain: &DomainDef, problem: &ProblemDef) -> Self {
        let actions = ground(domain, problem);
        let mut atoms: Vec<AtomExpr> = Vec::new();
        let mut index: HashMap<AtomExpr, usize> = HashMap::new();
        let mut intern = |a: &AtomExpr| -> usize {
            if let Some(&i) = index.get(a) {
                return i;
            }
            atoms.push(a.clone());
            index.insert(a.clone(), atoms.len() - 1);
            atoms.len() - 1
        };
        for a in problem.init.iter().chain(&problem.goal) {
            intern(a);
        }
        let compiled = actions
            .iter()
            .map(|a| CompiledAction {
                pre_pos: a.pre_pos.iter().map(&mut intern).collect(),
                pre_neg: a.pre_neg.iter().map(&mut intern).collect(),
                add: a.add.iter().map(&mut intern).collect(),
                delete: a.delete.iter().map(&mut intern).collect(),
            })
            .collect();
        Task {
            atoms,
            index,
            actions,
            compiled,
            init: State { facts: problem.init.clone(), cost: 0.0 },
            goal: problem.goal.clone(),
        }
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn initial_state(&self) -> State {
        self.init.clone()
    }

    pub fn goal(&self) -> &[AtomExpr] {
        &self.goal
    }

    pub fn goal_satisfied(&self, s: &State) -> bool {
        self.goal.iter().all(|g| s.holds(g))
    }

    pub fn find(&self, schema: &str, args: &[String]) -> Option<usize> {
        self.actions.iter().position(|a| a.schema == schema && a.args == args)
    }

    pub fn applicable(&self, s: &State, action: usize) -> bool {
        let a = &self.actions[action];
        a.pre_pos.iter().all(|x| s.holds(x)) && a.pre_neg.iter().all(|x| !s.holds(x))
    }

    /// Delete effects first, then add effects.
    pub fn apply(&self, s: &State, action: usize) -> State {
        let a = &self.actions[action];
        let mut next = s.clone();
        for d in &a.delete {
            next.facts.remove(d);
        }
        for x in &a.add {
            next.facts.insert(x.clone());
        }
        next.cost += a.cost;
        next
    }

    /// Facts outside the task's atom table cannot affect planning and are dropped.
    pub(crate) fn to_bits(&self, s: &State) -> Bits {
        let mut b = Bits::new(self.atoms.len());
        for f in &s.facts {
            if let Some(&i) = self.index.get(f) {
                b.set(i, true);
            }
        }
        b
    }

    pub(crate) fn goal_bits(&self) -> Vec<usize> {
        self.goal.iter().map(|g| self.index[g]).collect()
    }

    pub(crate) fn apply_bits(&self, b: &Bits, action: usize) -> Bits {
        let c = &self.compiled[action];
        let mut next = b.clone();
        for &d in &c.delete {
            next.set(d, false);
        }
        for &x in &c.add {
            next.set(x, true);
        }
        next
    }

    pub(crate) fn applicable_bits(&self, b: &Bits, action: usize) -> bool {
        let c = &self.compiled[action];
        c.pre_pos.iter().all(|&i| b.get(i)) && c.pre_neg.iter().all(|&i| !b.get(i))
    }
}
