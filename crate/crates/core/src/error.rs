use thiserror::Error;

use crate::model::Code;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("problem has no joints")]
    EmptyJointSet,
    #[error("{what} type count {count} is outside 1..=63")]
    TypeCountOutOfRange { what: &'static str, count: usize },
    #[error("environment object `{envo}` lists joint {joint}, which does not exist")]
    JointOutOfRange { envo: String, joint: usize },
    #[error("environment object `{0}` has no member joints")]
    EmptyEnvo(String),
    #[error("joint {joint} belongs to both `{first}` and `{second}`")]
    OverlappingEnvos { joint: usize, first: String, second: String },
    #[error("type rule [{joint_type}, {component_type}] uses a code outside the declared type ranges")]
    TypeCodeOutOfRange { joint_type: usize, component_type: usize },
    #[error("categorical domain sizes must be within 1..=255, got {0}")]
    BadDomainSize(usize),
    #[error("solution has {got} values, expected {expected}")]
    SolutionLength { expected: usize, got: usize },
    #[error("code {code} is outside the domain of variable {variable}")]
    CodeOutOfDomain { variable: usize, code: Code },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CpError {
    #[error("variable domain is empty")]
    EmptyDomain,
    #[error("domain value {0} exceeds the supported maximum of 63")]
    ValueTooLarge(u32),
    #[error("constraint refers to unknown variable #{0}")]
    UnknownVariable(usize),
    #[error("malformed constraint: {0}")]
    MalformedConstraint(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepairError {
    #[error("neither removing nor adding components yields a feasible assembly")]
    RepairFailed,
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("fitness evaluator returned NaN for solution {0}")]
    NotANumber(String),
    #[error("evaluator `{evaluator}` cannot be used with this problem: {reason}")]
    Incompatible { evaluator: &'static str, reason: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Error)]
pub enum ProblemFileError {
    #[error("cannot read problem file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Fitness(#[from] EvalError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("population size must be at least 2, got {0}")]
    PopulationTooSmall(usize),
    #[error("{name} must lie in (0, 1], got {value}")]
    RateOutOfRange { name: &'static str, value: f64 },
    #[error("{name} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    #[error("algorithms in a comparison must share population size and iteration budget: {0}")]
    InconsistentComparison(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Repair(#[from] RepairError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
