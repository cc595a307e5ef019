use thiserror::Error;

use crate::model::ValidationReport;
use crate::netformat::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },
    #[error("state index {index} out of range for `{variable}` ({states} states)")]
    StateOutOfRange {
        variable: String,
        index: usize,
        states: usize,
    },
    #[error("variable `{0}` is observed more than once")]
    DuplicateEvidence(String),
    #[error("malformed evidence token `{0}` (expected Var=state)")]
    MalformedEvidence(String),
    #[error("assignment covers {got} variables, network has {expected}")]
    IncompleteAssignment { expected: usize, got: usize },
    #[error("invalid network:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("network is not singly connected")]
    NotSinglyConnected,
    #[error("no arc {parent} -> {child}")]
    NoSuchArc { parent: String, child: String },
    #[error("impossible evidence{}", .variable.as_ref().map(|v| format!(" (zero belief at `{v}`)")).unwrap_or_default())]
    ImpossibleEvidence { variable: Option<String> },
    #[error("propagation did not reach equilibrium after {steps} steps")]
    NonConvergence { steps: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("invalid d-separation query: {0}")]
    InvalidQuery(String),
    #[error("not a loop cutset: {{{}}}", .0.join(", "))]
    InvalidCutset(Vec<String>),
    #[error("exhaustive cutset search limited to {limit} variables, network has {nodes}")]
    CutsetLimit { nodes: usize, limit: usize },
    #[error("joint state space of {states} exceeds the enumeration limit of {limit}")]
    StateSpaceTooLarge { states: u128, limit: u128 },
}
