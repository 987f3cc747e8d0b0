use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::sexpr::{parse_sexpr, SExpr};
use super::{ParseError, ParseErrorKind, Pos};

const SUPPORTED: [&str; 4] = ["strips", "typing", "negative-preconditions", "action-costs"];
pub const ROOT_TYPE: &str = "object";
pub const TOTAL_COST: &str = "total-cost";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

/// Predicate or function applied to terms (variables `?x` or object names).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomExpr {
    pub pred: String,
    pub args: Vec<String>,
}

impl std::fmt::Display for AtomExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub atom: AtomExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostExpr {
    Const(f64),
    Function(AtomExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Vec<Literal>,
    pub add: Vec<AtomExpr>,
    pub delete: Vec<AtomExpr>,
    /// `None` when the action has no `increase` effect.
    pub cost: Option<CostExpr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainDef {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent.
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Signature>,
    /// Numeric functions other than total-cost (static, defined in the problem).
    pub functions: Vec<Signature>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDef {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: BTreeSet<AtomExpr>,
    /// Values of static numeric functions, keyed by ground function term.
    pub numeric: BTreeMap<AtomExpr, f64>,
    pub goal: Vec<AtomExpr>,
    pub minimize_cost: bool,
}

impl DomainDef {
    pub fn has_requirement(&self, r: &str) -> bool {
        self.requirements.iter().any(|x| x == r)
    }

    /// Whether action costs come from `increase` effects; otherwise every
    /// action costs 1.
    pub fn uses_action_costs(&self) -> bool {
        self.has_requirement("action-costs")
    }

    pub fn predicate(&self, name: &str) -> Option<&Signature> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn type_exists(&self, ty: &str) -> bool {
        ty == ROOT_TYPE || self.types.iter().any(|t| t.name == ty)
    }

    /// True if `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty.to_string();
        for _ in 0..=self.types.len() {
            if cur == ancestor {
                return true;
            }
            match self.types.iter().find(|t| t.name == cur) {
                Some(t) => cur = t.ty.clone(),
                None => return ancestor == ROOT_TYPE,
            }
        }
        false
    }
}

impl ProblemDef {
    /// Problem objects followed by domain constants.
    pub fn all_objects<'a>(&'a self, domain: &'a DomainDef) -> impl Iterator<Item = &'a TypedName> {
        self.objects.iter().chain(domain.constants.iter())
    }
}

fn err(kind: ParseErrorKind, pos: Pos) -> ParseError {
    ParseError { kind, pos }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    err(ParseErrorKind::Syntax(msg.into()), pos)
}

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], ParseError> {
    e.list().ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

fn expect_atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, ParseError> {
    e.atom().ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

/// `a b - t c - u d` → [(a,t),(b,t),(c,u),(d,object)], with positions.
fn typed_list(items: &[SExpr]) -> Result<Vec<(TypedName, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let s = expect_atom(&items[i], "a name")?;
        if s == "-" {
            let t = items.get(i + 1).ok_or_else(|| syntax(items[i].pos(), "missing type after `-`"))?;
            let ty = expect_atom(t, "a type name")?;
            if pending.is_empty() {
                return Err(syntax(items[i].pos(), "`-` without preceding names"));
            }
            out.extend(pending.drain(..).map(|(name, p)| (TypedName { name, ty: ty.to_string() }, p)));
            i += 2;
        } else {
            pending.push((s.to_string(), items[i].pos()));
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|(name, p)| (TypedName { name, ty: ROOT_TYPE.to_string() }, p)));
    Ok(out)
}

fn atom_expr(e: &SExpr) -> Result<AtomExpr, ParseError> {
    let items = expect_list(e, "an atom")?;
    let pred = expect_atom(items.first().ok_or_else(|| syntax(e.pos(), "empty atom"))?, "a predicate name")?;
    let args = items[1..].iter().map(|a| expect_atom(a, "a term").map(str::to_string)).collect::<Result<_, _>>()?;
    Ok(AtomExpr { pred: pred.to_string(), args })
}

/// Flattens `(and …)` (or a single element, or `()`) into its conjuncts.
fn conjuncts(e: &SExpr) -> Result<Vec<&SExpr>, ParseError> {
    let items = expect_list(e, "a formula")?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    if e.head() == Some("and") {
        let mut out = Vec::new();
        for c in &items[1..] {
            out.extend(conjuncts(c)?);
        }
        Ok(out)
    } else {
        Ok(vec![e])
    }
}

fn literal(e: &SExpr) -> Result<(Literal, Pos), ParseError> {
    match e.head() {
        Some("not") => {
            let items = e.list().unwrap_or_default();
            if items.len() != 2 {
                return Err(syntax(e.pos(), "`not` takes one atom"));
            }
            Ok((Literal { positive: false, atom: atom_expr(&items[1])? }, items[1].pos()))
        }
        Some("or") | Some("imply") | Some("forall") | Some("exists") | Some("when") | Some("=") => {
            Err(syntax(e.pos(), format!("unsupported construct `{}`", e.head().unwrap_or_default())))
        }
        _ => Ok((Literal { positive: true, atom: atom_expr(e)? }, e.pos())),
    }
}

struct Checker<'a> {
    domain: &'a DomainDef,
}

impl Checker<'_> {
    fn check_type(&self, ty: &str, pos: Pos) -> Result<(), ParseError> {
        if self.domain.type_exists(ty) {
            Ok(())
        } else {
            Err(err(ParseErrorKind::UnknownType(ty.to_string()), pos))
        }
    }

    fn signature<'s>(&self, sigs: &'s [Signature], a: &AtomExpr, pos: Pos) -> Result<&'s Signature, ParseError> {
        let sig = sigs
            .iter()
            .find(|p| p.name == a.pred)
            .ok_or_else(|| err(ParseErrorKind::UnknownPredicate(a.pred.clone()), pos))?;
        if sig.params.len() != a.args.len() {
            return Err(err(
                ParseErrorKind::ArityMismatch { name: a.pred.clone(), expected: sig.params.len(), found: a.args.len() },
                pos,
            ));
        }
        Ok(sig)
    }

    /// Resolves each argument's type (parameter or object) and checks it
    /// against the signature.
    fn check_args(
        &self,
        sig: &Signature,
        a: &AtomExpr,
        pos: Pos,
        lookup: &dyn Fn(&str) -> Option<String>,
    ) -> Result<(), ParseError> {
        for (arg, p) in a.args.iter().zip(&sig.params) {
            let ty = lookup(arg).ok_or_else(|| {
                if arg.starts_with('?') {
                    err(ParseErrorKind::UndeclaredVariable(arg.clone()), pos)
                } else {
                    err(ParseErrorKind::UndeclaredObject(arg.clone()), pos)
                }
            })?;
            if !self.domain.is_subtype(&ty, &p.ty) {
                return Err(err(
                    ParseErrorKind::TypeMismatch { term: arg.clone(), expected: p.ty.clone(), found: ty },
                    pos,
                ));
            }
        }
        Ok(())
    }
}

fn section_key(e: &SExpr) -> Option<&str> {
    e.head().filter(|h| h.starts_with(':'))
}

fn parse_header<'a>(top: &'a SExpr, kind: &str) -> Result<(String, &'a [SExpr]), ParseError> {
    let items = expect_list(top, "`(define …)`")?;
    if top.head() != Some("define") {
        return Err(syntax(top.pos(), "expected `(define …)`"));
    }
    let head = items.get(1).ok_or_else(|| syntax(top.pos(), format!("missing `({kind} NAME)`")))?;
    let h = expect_list(head, &format!("`({kind} NAME)`"))?;
    if head.head() != Some(kind) || h.len() != 2 {
        return Err(syntax(head.pos(), format!("expected `({kind} NAME)`")));
    }
    Ok((expect_atom(&h[1], "a name")?.to_string(), &items[2..]))
}

pub fn parse_domain(text: &str) -> Result<DomainDef, ParseError> {
    let top = parse_sexpr(text)?;
    let (name, sections) = parse_header(&top, "domain")?;
    let mut d = DomainDef {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        functions: Vec::new(),
        actions: Vec::new(),
    };
    let mut constant_pos = Vec::new();
    let mut pending_actions = Vec::new();
    let mut type_pos = Vec::new();
    let mut sig_pos = Vec::new();
    for s in sections {
        let items = expect_list(s, "a domain section")?;
        match section_key(s) {
            Some(":requirements") => {
                for r in &items[1..] {
                    let r_name = expect_atom(r, "a requirement")?;
                    let bare = r_name.strip_prefix(':').unwrap_or(r_name);
                    if !SUPPORTED.contains(&bare) {
                        return Err(err(ParseErrorKind::UnsupportedRequirement(bare.to_string()), r.pos()));
                    }
                    d.requirements.push(bare.to_string());
                }
            }
            Some(":types") => {
                for (t, p) in typed_list(&items[1..])? {
                    type_pos.push((t.ty.clone(), p));
                    d.types.push(t);
                }
            }
            Some(":constants") => {
                for (c, p) in typed_list(&items[1..])? {
                    constant_pos.push(p);
                    d.constants.push(c);
                }
            }
            Some(":predicates") => {
                for p in &items[1..] {
                    let pi = expect_list(p, "a predicate declaration")?;
                    let n = expect_atom(pi.first().ok_or_else(|| syntax(p.pos(), "empty predicate"))?, "a name")?;
                    let params: Vec<TypedName> = typed_list(&pi[1..])?.into_iter().map(|(t, _)| t).collect();
                    sig_pos.push((params.clone(), p.pos()));
                    d.predicates.push(Signature { name: n.to_string(), params });
                }
            }
            Some(":functions") => {
                let mut i = 1;
                while i < items.len() {
                    let f = &items[i];
                    let fi = expect_list(f, "a function declaration")?;
                    let n = expect_atom(fi.first().ok_or_else(|| syntax(f.pos(), "empty function"))?, "a name")?;
                    let params: Vec<TypedName> = typed_list(&fi[1..])?.into_iter().map(|(t, _)| t).collect();
                    i += 1;
                    if items.get(i).and_then(SExpr::atom) == Some("-") {
                        let ty = items.get(i + 1).and_then(SExpr::atom);
                        if ty != Some("number") {
                            return Err(syntax(items[i].pos(), "functions must be of type number"));
                        }
                        i += 2;
                    }
                    if n != TOTAL_COST {
                        sig_pos.push((params.clone(), f.pos()));
                        d.functions.push(Signature { name: n.to_string(), params });
                    } else if !params.is_empty() {
                        return Err(syntax(f.pos(), "total-cost takes no arguments"));
                    }
                }
            }
            Some(":action") => pending_actions.push(s),
            _ => return Err(syntax(s.pos(), "unknown domain section")),
        }
    }
    let typing = d.has_requirement("typing");
    let chk = Checker { domain: &d };
    for (ty, p) in &type_pos {
        chk.check_type(ty, *p)?;
    }
    for (c, p) in d.constants.iter().zip(&constant_pos) {
        chk.check_type(&c.ty, *p)?;
    }
    for (params, p) in &sig_pos {
        for t in params {
            chk.check_type(&t.ty, *p)?;
        }
    }
    if !typing && (!d.types.is_empty() || d.predicates.iter().any(|p| p.params.iter().any(|t| t.ty != ROOT_TYPE))) {
        return Err(syntax(top.pos(), "types used without :typing"));
    }
    let mut actions = Vec::new();
    for s in pending_actions {
        actions.push(parse_action(&d, s)?);
    }
    d.actions = actions;
    Ok(d)
}

fn parse_action(d: &DomainDef, s: &SExpr) -> Result<ActionSchema, ParseError> {
    let items = s.list().unwrap_or_default();
    let name = expect_atom(items.get(1).ok_or_else(|| syntax(s.pos(), "missing action name"))?, "an action name")?;
    let mut params = Vec::new();
    let mut pre_e = None;
    let mut eff_e = None;
    let mut i = 2;
    while i < items.len() {
        let key = expect_atom(&items[i], "an action keyword")?;
        let val = items.get(i + 1).ok_or_else(|| syntax(items[i].pos(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => {
                let chk = Checker { domain: d };
                for (t, p) in typed_list(expect_list(val, "a parameter list")?)? {
                    if !t.name.starts_with('?') {
                        return Err(syntax(p, "parameters must start with `?`"));
                    }
                    chk.check_type(&t.ty, p)?;
                    params.push(t);
                }
            }
            ":precondition" => pre_e = Some(val),
            ":effect" => eff_e = Some(val),
            _ => return Err(syntax(items[i].pos(), format!("unknown action keyword {key}"))),
        }
        i += 2;
    }
    let chk = Checker { domain: d };
    let lookup = |t: &str| -> Option<String> {
        params.iter().find(|p| p.name == t).or_else(|| d.constants.iter().find(|c| c.name == t)).map(|p| p.ty.clone())
    };
    let mut precondition = Vec::new();
    if let Some(e) = pre_e {
        for c in conjuncts(e)? {
            let (lit, pos) = literal(c)?;
            if !lit.positive && !d.has_requirement("negative-preconditions") {
                return Err(syntax(pos, "negative precondition without :negative-preconditions"));
            }
            let sig = chk.signature(&d.predicates, &lit.atom, pos)?;
            chk.check_args(sig, &lit.atom, pos, &lookup)?;
            precondition.push(lit);
        }
    }
    let mut add = Vec::new();
    let mut delete = Vec::new();
    let mut cost = None;
    if let Some(e) = eff_e {
        for c in conjuncts(e)? {
            if c.head() == Some("increase") {
                let ci = c.list().unwrap_or_default();
                if ci.len() != 3 || ci[1].head() != Some(TOTAL_COST) || ci[1].list().map(<[_]>::len) != Some(1) {
                    return Err(syntax(c.pos(), "expected `(increase (total-cost) VALUE)`"));
                }
                if !d.uses_action_costs() {
                    return Err(syntax(c.pos(), "`increase` without :action-costs"));
                }
                if cost.is_some() {
                    return Err(syntax(c.pos(), "more than one cost effect"));
                }
                cost = Some(match &ci[2] {
                    SExpr::Atom(v, p) => {
                        let x: f64 = v.parse().map_err(|_| syntax(*p, format!("bad number `{v}`")))?;
                        if !(x >= 0.0) || !x.is_finite() {
                            return Err(syntax(*p, "action cost must be non-negative"));
                        }
                        CostExpr::Const(x)
                    }
                    f => {
                        let a = atom_expr(f)?;
                        let sig = chk.signature(&d.functions, &a, f.pos())?;
                        chk.check_args(sig, &a, f.pos(), &lookup)?;
                        CostExpr::Function(a)
                    }
                });
                continue;
            }
            let (lit, pos) = literal(c)?;
            let sig = chk.signature(&d.predicates, &lit.atom, pos)?;
            chk.check_args(sig, &lit.atom, pos, &lookup)?;
            if lit.positive {
                add.push(lit.atom);
            } else {
                delete.push(lit.atom);
            }
        }
    }
    Ok(ActionSchema { name: name.to_string(), params, precondition, add, delete, cost })
}

pub fn parse_problem(text: &str, d: &DomainDef) -> Result<ProblemDef, ParseError> {
    let top = parse_sexpr(text)?;
    let (name, sections) = parse_header(&top, "problem")?;
    let mut p = ProblemDef {
        name,
        domain: String::new(),
        objects: Vec::new(),
        init: BTreeSet::new(),
        numeric: BTreeMap::new(),
        goal: Vec::new(),
        minimize_cost: false,
    };
    let chk = Checker { domain: d };
    let mut init_e = None;
    let mut goal_e = None;
    for s in sections {
        let items = expect_list(s, "a problem section")?;
        match section_key(s) {
            Some(":domain") => {
                let n = expect_atom(items.get(1).ok_or_else(|| syntax(s.pos(), "missing domain name"))?, "a name")?;
                if n != d.name {
                    return Err(syntax(items[1].pos(), format!("problem is for domain `{n}`, not `{}`", d.name)));
                }
                p.domain = n.to_string();
            }
            Some(":objects") => {
                for (o, pos) in typed_list(&items[1..])? {
                    chk.check_type(&o.ty, pos)?;
                    if p.objects.iter().chain(&d.constants).any(|x| x.name == o.name) {
                        return Err(syntax(pos, format!("object `{}` declared twice", o.name)));
                    }
                    p.objects.push(o);
                }
            }
            Some(":init") => init_e = Some(&items[1..]),
            Some(":goal") => goal_e = Some(items.get(1).ok_or_else(|| syntax(s.pos(), "missing goal"))?),
            Some(":metric") => {
                let ok = items.len() == 3 && items[1].atom() == Some("minimize") && items[2].head() == Some(TOTAL_COST);
                if !ok {
                    return Err(syntax(s.pos(), "only `(:metric minimize (total-cost))` is supported"));
                }
                p.minimize_cost = true;
            }
            _ => return Err(syntax(s.pos(), "unknown problem section")),
        }
    }
    if p.domain.is_empty() {
        return Err(syntax(top.pos(), "missing `(:domain NAME)`"));
    }
    let objects = p.objects.clone();
    let lookup =
        |t: &str| -> Option<String> { objects.iter().chain(&d.constants).find(|o| o.name == t).map(|o| o.ty.clone()) };
    for e in init_e.unwrap_or_default() {
        if e.head() == Some("=") {
            let ei = e.list().unwrap_or_default();
            if ei.len() != 3 {
                return Err(syntax(e.pos(), "expected `(= (f args) value)`"));
            }
            let f = atom_expr(&ei[1])?;
            let v = expect_atom(&ei[2], "a number")?;
            let x: f64 = v.parse().map_err(|_| syntax(ei[2].pos(), format!("bad number `{v}`")))?;
            if f.pred == TOTAL_COST {
                if !f.args.is_empty() || x != 0.0 {
                    return Err(syntax(e.pos(), "total-cost must start at 0"));
                }
                continue;
            }
            if !(x >= 0.0) || !x.is_finite() {
                return Err(syntax(ei[2].pos(), "function values must be non-negative"));
            }
            let sig = chk.signature(&d.functions, &f, ei[1].pos())?;
            chk.check_args(sig, &f, ei[1].pos(), &lookup)?;
            p.numeric.insert(f, x);
            continue;
        }
        let a = atom_expr(e)?;
        let sig = chk.signature(&d.predicates, &a, e.pos())?;
        chk.check_args(sig, &a, e.pos(), &lookup)?;
        p.init.insert(a);
    }
    if let Some(g) = goal_e {
        for c in conjuncts(g)? {
            let (lit, pos) = literal(c)?;
            if !lit.positive {
                return Err(syntax(pos, "goals must be positive literals"));
            }
            let sig = chk.signature(&d.predicates, &lit.atom, pos)?;
            chk.check_args(sig, &lit.atom, pos, &lookup)?;
            p.goal.push(lit.atom);
        }
    }
    Ok(p)
}

fn write_typed(out: &mut String, items: &[TypedName], typing: bool) {
    let mut first = true;
    let mut i = 0;
    while i < items.len() {
        let ty = &items[i].ty;
        let mut j = i;
        while j < items.len() && items[j].ty == *ty {
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&items[j].name);
            j += 1;
        }
        if typing {
            let _ = write!(out, " - {ty}");
        }
        i = j;
    }
}

fn literal_text(l: &Literal) -> String {
    if l.positive {
        l.atom.to_string()
    } else {
        format!("(not {})", l.atom)
    }
}

fn fmt_number(x: f64) -> String {
    format!("{x}")
}

pub fn print_domain(d: &DomainDef) -> String {
    let typing = d.has_requirement("typing");
    let mut s = format!("(define (domain {})\n", d.name);
    if !d.requirements.is_empty() {
        let r: Vec<String> = d.requirements.iter().map(|r| format!(":{r}")).collect();
        let _ = writeln!(s, "  (:requirements {})", r.join(" "));
    }
    if !d.types.is_empty() {
        s.push_str("  (:types ");
        write_typed(&mut s, &d.types, true);
        s.push_str(")\n");
    }
    if !d.constants.is_empty() {
        s.push_str("  (:constants ");
        write_typed(&mut s, &d.constants, typing);
        s.push_str(")\n");
    }
    s.push_str("  (:predicates");
    for p in &d.predicates {
        let _ = write!(s, "\n    ({}", p.name);
        if !p.params.is_empty() {
            s.push(' ');
            write_typed(&mut s, &p.params, typing);
        }
        s.push(')');
    }
    s.push_str(")\n");
    if d.uses_action_costs() || !d.functions.is_empty() {
        s.push_str("  (:functions (total-cost) - number");
        for f in &d.functions {
            let _ = write!(s, "\n    ({}", f.name);
            if !f.params.is_empty() {
                s.push(' ');
                write_typed(&mut s, &f.params, typing);
            }
            s.push_str(") - number");
        }
        s.push_str(")\n");
    }
    for a in &d.actions {
        let _ = write!(s, "  (:action {}\n    :parameters (", a.name);
        write_typed(&mut s, &a.params, typing);
        s.push_str(")\n    :precondition (and");
        for l in &a.precondition {
            let _ = write!(s, " {}", literal_text(l));
        }
        s.push_str(")\n    :effect (and");
        for x in &a.add {
            let _ = write!(s, " {x}");
        }
        for x in &a.delete {
            let _ = write!(s, " (not {x})");
        }
        match &a.cost {
            Some(CostExpr::Const(c)) => {
                let _ = write!(s, " (increase (total-cost) {})", fmt_number(*c));
            }
            Some(CostExpr::Function(f)) => {
                let _ = write!(s, " (increase (total-cost) {f})");
            }
            None => {}
        }
        s.push_str("))\n");
    }
    s.push_str(")\n");
    s
}

pub fn print_problem(p: &ProblemDef, d: &DomainDef) -> String {
    let typing = d.has_requirement("typing");
    let mut s = format!("(define (problem {})\n  (:domain {})\n", p.name, p.domain);
    if !p.objects.is_empty() {
        s.push_str("  (:objects ");
        write_typed(&mut s, &p.objects, typing);
        s.push_str(")\n");
    }
    s.push_str("  (:init");
    for a in &p.init {
        let _ = write!(s, "\n    {a}");
    }
    if d.uses_action_costs() {
        s.push_str("\n    (= (total-cost) 0)");
    }
    for (f, v) in &p.numeric {
        let _ = write!(s, "\n    (= {f} {})", fmt_number(*v));
    }
    s.push_str(")\n  (:goal (and");
    for g in &p.goal {
        let _ = write!(s, " {g}");
    }
    s.push_str("))\n");
    if p.minimize_cost {
        s.push_str("  (:metric minimize (total-cost))\n");
    }
    s.push_str(")\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = "(define (domain mini) (:requirements :strips) (:predicates (p)) (:action a :parameters () :precondition () :effect (p)))";

    #[test]
    fn minimal_domain() {
        let d = parse_domain(MINI).unwrap();
        assert_eq!(d.actions.len(), 1);
        assert_eq!(d.actions[0].add, vec![AtomExpr { pred: "p".into(), args: vec![] }]);
        assert_eq!(parse_domain(&print_domain(&d)).unwrap(), d);
    }

    #[test]
    fn unsupported_requirement() {
        let e = parse_domain("(define (domain x)\n  (:requirements :strips :durative-actions))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnsupportedRequirement("durative-actions".into()));
        assert_eq!(e.pos, Pos { line: 2, col: 26 });
    }

    const TYPED: &str = "(define (domain t) (:requirements :typing :negative-preconditions)
  (:types room box - object)
  (:predicates (in ?b - box ?r - room) (open ?r - room))
  (:action shut :parameters (?r - room) :precondition (and (open ?r)) :effect (not (open ?r))))";

    #[test]
    fn semantic_errors() {
        let bad_arity = TYPED.replace("(and (open ?r))", "(and (open ?r ?r))");
        assert!(matches!(
            parse_domain(&bad_arity).unwrap_err().kind,
            ParseErrorKind::ArityMismatch { expected: 1, found: 2, .. }
        ));
        let bad_type = TYPED.replace("(?r - room)", "(?r - hall)");
        assert_eq!(parse_domain(&bad_type).unwrap_err().kind, ParseErrorKind::UnknownType("hall".into()));
        let bad_var = TYPED.replace("(and (open ?r))", "(and (open ?q))");
        assert_eq!(parse_domain(&bad_var).unwrap_err().kind, ParseErrorKind::UndeclaredVariable("?q".into()));
        let d = parse_domain(TYPED).unwrap();
        let prob = |init: &str| {
            format!(
                "(define (problem q) (:domain t) (:objects r1 - room b1 - box) (:init {init}) (:goal (and (open r1))))"
            )
        };
        assert!(parse_problem(&prob("(open r1)"), &d).is_ok());
        assert!(matches!(parse_problem(&prob("(open b1)"), &d).unwrap_err().kind, ParseErrorKind::TypeMismatch { .. }));
        assert_eq!(
            parse_problem(&prob("(open r9)"), &d).unwrap_err().kind,
            ParseErrorKind::UndeclaredObject("r9".into())
        );
        assert!(matches!(
            parse_problem(&prob("(open r1 r1)"), &d).unwrap_err().kind,
            ParseErrorKind::ArityMismatch { .. }
        ));
    }

    #[test]
    fn goal_in_init_is_valid() {
        let d = parse_domain(TYPED).unwrap();
        let p = parse_problem(
            "(define (problem q) (:domain t) (:objects r1 - room) (:init (open r1)) (:goal (open r1)))",
            &d,
        )
        .unwrap();
        assert!(p.goal.iter().all(|g| p.init.contains(g)));
        assert_eq!(parse_problem(&print_problem(&p, &d), &d).unwrap(), p);
    }

    #[test]
    fn bundled_files_round_trip() {
        use crate::planning::{TRANSPORT_DOMAIN, TRANSPORT_ONE, TRANSPORT_THREE};
        let d = parse_domain(TRANSPORT_DOMAIN).unwrap();
        let d2 = parse_domain(&print_domain(&d)).unwrap();
        assert_eq!(d2, d);
        assert_eq!(print_domain(&d2), print_domain(&d));
        for text in [TRANSPORT_ONE, TRANSPORT_THREE] {
            let p = parse_problem(text, &d).unwrap();
            assert_eq!(parse_problem(&print_problem(&p, &d), &d).unwrap(), p);
        }
        let p3 = parse_problem(TRANSPORT_THREE, &d).unwrap();
        assert_eq!(p3.objects.iter().filter(|o| o.ty == "item").count(), 3);
        assert_eq!(p3.objects.iter().filter(|o| o.ty == "location").count(), 3);
    }

    #[test]
    fn subtypes() {
        let d = parse_domain(
            "(define (domain s) (:requirements :typing) (:types a - object b - a c - b) (:predicates (p ?x - a)))",
        )
        .unwrap();
        assert!(d.is_subtype("c", "a") && d.is_subtype("c", "object") && !d.is_subtype("a", "c"));
    }
}
