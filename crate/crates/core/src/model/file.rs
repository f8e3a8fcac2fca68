use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::spec::{build_spec, ProblemSpec, RawSpec, Solution};
use crate::error::{ProblemFileError, SpecError};
use crate::fitness::FitnessConfig;

/// Unconstrained categorical search space, used for synthetic benchmarks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalSpace {
    domain_sizes: Vec<usize>,
}

impl CategoricalSpace {
    pub fn new(domain_sizes: Vec<usize>) -> Result<Self, SpecError> {
        if let Some(&bad) = domain_sizes.iter().find(|&&d| d == 0 || d > 255) {
            return Err(SpecError::BadDomainSize(bad));
        }
        Ok(Self { domain_sizes })
    }

    pub fn binary(n: usize) -> Self {
        Self { domain_sizes: vec![2; n] }
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }

    pub fn check_solution(&self, s: &Solution) -> Result<(), SpecError> {
        if s.len() != self.domain_sizes.len() {
            return Err(SpecError::SolutionLength { expected: self.domain_sizes.len(), got: s.len() });
        }
        for (variable, (&code, &size)) in s.values().iter().zip(&self.domain_sizes).enumerate() {
            if code as usize >= size {
                return Err(SpecError::CodeOutOfDomain { variable, code });
            }
        }
        Ok(())
    }
}

/// Either an assembly graph problem or a plain categorical space.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Assembly(ProblemSpec),
    Categorical(CategoricalSpace),
}

impl Problem {
    pub fn domain_sizes(&self) -> &[usize] {
        match self {
            Problem::Assembly(spec) => spec.domain_sizes(),
            Problem::Categorical(space) => space.domain_sizes(),
        }
    }

    pub fn n_variables(&self) -> usize {
        self.domain_sizes().len()
    }

    pub fn as_assembly(&self) -> Option<&ProblemSpec> {
        match self {
            Problem::Assembly(spec) => Some(spec),
            Problem::Categorical(_) => None,
        }
    }

    pub fn check_solution(&self, s: &Solution) -> Result<(), SpecError> {
        match self {
            Problem::Assembly(spec) => spec.check_solution(s),
            Problem::Categorical(space) => space.check_solution(s),
        }
    }

    /// Feasibility per the graph-search oracle; categorical spaces have no constraints.
    pub fn is_feasible(&self, s: &Solution) -> bool {
        match self {
            Problem::Assembly(spec) => super::is_feasible(spec, s).is_empty(),
            Problem::Categorical(space) => space.check_solution(s).is_ok(),
        }
    }
}

#[derive(Deserialize)]
struct RawCategorical {
    domains: Vec<usize>,
}

#[derive(Deserialize)]
struct FitnessOnly {
    fitness: FitnessConfig,
}

/// A parsed problem file: the search space plus the fitness evaluator to use.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub problem: Problem,
    pub fitness: FitnessConfig,
    /// Hex SHA-256 of the file contents.
    pub hash: String,
}

impl ProblemFile {
    /// Parses a JSON problem file. A top-level `domains` array selects a
    /// categorical space; otherwise the assembly fields are required.
    pub fn from_json(text: &str) -> Result<Self, ProblemFileError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let problem = if value.get("domains").is_some() {
            let raw: RawCategorical = serde_json::from_value(value.clone())?;
            Problem::Categorical(CategoricalSpace::new(raw.domains)?)
        } else {
            let raw: RawSpec = serde_json::from_value(value.clone())?;
            Problem::Assembly(build_spec(&raw)?)
        };
        let FitnessOnly { fitness } = serde_json::from_value(value)?;
        fitness.validate(&problem)?;
        let digest = Sha256::digest(text.as_bytes());
        let hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self { problem, fitness, hash })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemFileError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}
