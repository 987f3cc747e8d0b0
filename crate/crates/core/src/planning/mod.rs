//! PDDL subset (STRIPS, typing, negative preconditions, action costs):
//! parsing, pretty-printing, grounding, forward search and plan validation.

mod ground;
mod pddl;
mod planfile;
mod search;
mod sexpr;
mod validate;

use thiserror::Error;

pub use ground::{ground, GroundAction, State, Task};
pub use pddl::{
    parse_domain, parse_problem, print_domain, print_problem, ActionSchema, AtomExpr, CostExpr, DomainDef, Literal,
    ProblemDef, Signature, TypedName,
};
pub use planfile::{read_plan, write_plan};
pub use search::{plan, Plan, PlanMode, PlanStep};
pub use sexpr::{parse_sexpr, SExpr};
pub use validate::{instantiate, validate, Validation, ValidationFailure};

pub const TRANSPORT_DOMAIN: &str = include_str!("../../data/pddl/transport-domain.pddl");
pub const TRANSPORT_ONE: &str = include_str!("../../data/pddl/transport-1.pddl");
pub const TRANSPORT_THREE: &str = include_str!("../../data/pddl/transport-3.pddl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported requirement :{0}")]
    UnsupportedRequirement(String),
    #[error("`{name}` takes {expected} arguments, got {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown predicate or function `{0}`")]
    UnknownPredicate(String),
    #[error("undeclared object `{0}`")]
    UndeclaredObject(String),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("`{term}` has type {found}, expected {expected}")]
    TypeMismatch { term: String, expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}:{}: {kind}", pos.line, pos.col)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no plan reaches the goal")]
    Unsolvable,
    #[error("plan file line {line}: {msg}")]
    PlanFile { line: usize, msg: String },
}
