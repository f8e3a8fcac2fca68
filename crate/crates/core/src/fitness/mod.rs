//! Fitness evaluators. Lower is better for every evaluator.

pub mod sim;
pub mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::model::{Problem, Solution};

pub use sim::{SuspensionEvaluator, SuspensionParams, Trajectory};
pub use synthetic::{SyntheticEvaluator, SyntheticKind};

/// Black-box objective. Implementations must be pure so they can be called concurrently.
pub trait Evaluator: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, s: &Solution) -> Result<f64, EvalError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedParams {
    pub seed: u64,
}

/// The `fitness` block of a problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", content = "params", rename_all = "snake_case")]
pub enum FitnessConfig {
    Suspension(Box<SuspensionParams>),
    OneMax,
    TrapPairs,
    PlantedPairs(PlantedParams),
}

impl FitnessConfig {
    pub fn validate(&self, problem: &Problem) -> Result<(), EvalError> {
        match self {
            FitnessConfig::Suspension(params) => match problem {
                Problem::Assembly(spec) => sim::suspension::check_compatible(spec, params),
                Problem::Categorical(_) => Err(EvalError::Incompatible {
                    evaluator: "suspension",
                    reason: "requires an assembly problem".into(),
                }),
            },
            _ => Ok(()),
        }
    }

    pub fn build(&self, problem: &Problem) -> Result<Box<dyn Evaluator>, EvalError> {
        self.validate(problem)?;
        let n = problem.n_variables();
        Ok(match self {
            FitnessConfig::Suspension(params) => {
                let spec = problem.as_assembly().expect("validated").clone();
                Box::new(SuspensionEvaluator::new(spec, (**params).clone())?)
            }
            FitnessConfig::OneMax => Box::new(SyntheticEvaluator::new(SyntheticKind::OneMax, n)),
            FitnessConfig::TrapPairs => Box::new(SyntheticEvaluator::new(SyntheticKind::TrapPairs, n)),
            FitnessConfig::PlantedPairs(PlantedParams { seed }) => {
                Box::new(SyntheticEvaluator::new(SyntheticKind::PlantedPairs { seed: *seed }, n))
            }
        })
    }

    /// Known optimum for synthetic functions.
    pub fn known_optimum(&self, problem: &Problem) -> Option<f64> {
        let n = problem.n_variables();
        let kind = match self {
            FitnessConfig::Suspension(_) => return None,
            FitnessConfig::OneMax => SyntheticKind::OneMax,
            FitnessConfig::TrapPairs => SyntheticKind::TrapPairs,
            FitnessConfig::PlantedPairs(p) => SyntheticKind::PlantedPairs { seed: p.seed },
        };
        Some(SyntheticEvaluator::new(kind, n).optimum())
    }
}
