use serde::{Deserialize, Serialize};

use crate::eda::{AlgoConfig, DependencyStats, ProbabilityModel};
use crate::model::Solution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Best fitness seen so far.
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Cumulative fitness evaluations.
    pub evals: u64,
    pub wall_ms: f64,
}

/// Everything a run produced. Iteration 0 is the initial population; model
/// snapshots and significant-pair lists start at iteration 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub config: AlgoConfig,
    pub spec_hash: Option<String>,
    pub records: Vec<IterationRecord>,
    pub best: Option<Solution>,
    pub best_fitness: f64,
    /// Final dependency statistics, including cumulative χ² totals.
    pub dependencies: Option<DependencyStats>,
    pub models: Vec<ProbabilityModel>,
    pub significant: Vec<Vec<(usize, usize)>>,
}

impl RunHistory {
    pub fn new(config: AlgoConfig, spec_hash: Option<String>) -> Self {
        Self {
            config,
            spec_hash,
            records: Vec::new(),
            best: None,
            best_fitness: f64::INFINITY,
            dependencies: None,
            models: Vec::new(),
            significant: Vec::new(),
        }
    }

    /// Number of completed generations after the initial one.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn total_evals(&self) -> u64 {
        self.records.last().map_or(0, |r| r.evals)
    }

    /// Cumulative evaluations at the first record whose best fitness reaches `target`.
    pub fn evals_to_reach(&self, target: f64) -> Option<u64> {
        self.records.iter().find(|r| r.best_fitness <= target).map(|r| r.evals)
    }

    /// Pairs `(i, j)`, `i < j`, flagged significant in at least one generation.
    pub fn ever_significant(&self) -> Vec<(usize, usize)> {
        let mut all: Vec<(usize, usize)> = self.significant.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Pairs flagged significant in some generation `<= generation`.
    pub fn significant_by(&self, generation: usize) -> Vec<(usize, usize)> {
        let mut all: Vec<(usize, usize)> = self.significant.iter().take(generation).flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}
