//! Bivariate EDA with Gibbs sampling, plus the original dependency-forest BMDA
//! and a genetic algorithm as baselines.

mod bmda;
mod chi2;
mod config;
mod evaluate;
mod ga;
mod gibbs;
mod model;
mod population;
mod run;

pub use bmda::{ancestral_sample, build_forest, forest_model, Forest};
pub use chi2::{chi_square, threshold, value_counts, ChiSquare, DependencyStats, THRESHOLDS_99};
pub use config::{AlgoConfig, Algorithm, UnsupportedAlgorithm};
pub use evaluate::BatchEvaluator;
pub use ga::breed;
pub use gibbs::{gibbs_sample, sample_categorical};
pub use model::{conditional_table, estimate_model, marginal, ProbabilityModel};
pub use population::{initialize_population, truncation_size, uniform_solution, Population};
pub use run::{run, RunFailure, RunOptions};

use crate::error::RepairError;
use crate::model::{Problem, Solution};
use crate::repair::{RepairOptions, Repairer};

/// A problem together with the repair operator applied to every sampled candidate.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    problem: Problem,
    repairer: Option<Repairer>,
}

impl SearchSpace {
    pub fn new(problem: Problem) -> Self {
        Self::with_repair_options(problem, RepairOptions::default())
    }

    pub fn with_repair_options(problem: Problem, options: RepairOptions) -> Self {
        let repairer = problem.as_assembly().map(|spec| Repairer::with_options(spec, options));
        Self { problem, repairer }
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn domain_sizes(&self) -> &[usize] {
        self.problem.domain_sizes()
    }

    pub fn n_variables(&self) -> usize {
        self.problem.n_variables()
    }

    /// Repairs assembly candidates; categorical candidates pass through.
    pub fn repair(&self, s: Solution, seed: u64) -> Result<Solution, RepairError> {
        match &self.repairer {
            Some(r) => Ok(r.repair(&s, seed)?.repaired),
            None => Ok(s),
        }
    }
}
