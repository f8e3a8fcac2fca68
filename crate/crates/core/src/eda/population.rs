use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SearchSpace;
use crate::error::{ConfigError, RepairError};
use crate::model::{Code, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub solutions: Vec<Solution>,
    pub fitnesses: Vec<f64>,
    pub generation: usize,
}

impl Population {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Indices sorted by fitness, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.fitnesses.len()).collect();
        idx.sort_by(|&a, &b| self.fitnesses[a].total_cmp(&self.fitnesses[b]).then(a.cmp(&b)));
        idx
    }

    /// The `ceil(rate * |P|)` best solutions, best first.
    pub fn select_truncation(&self, rate: f64) -> Result<Vec<&Solution>, ConfigError> {
        let n = truncation_size(self.len(), rate)?;
        Ok(self.ranking().into_iter().take(n).map(|i| &self.solutions[i]).collect())
    }

    pub fn mean_fitness(&self) -> f64 {
        self.fitnesses.iter().sum::<f64>() / self.fitnesses.len() as f64
    }
}

pub fn truncation_size(population: usize, rate: f64) -> Result<usize, ConfigError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(ConfigError::RateOutOfRange { name: "truncation_rate", value: rate });
    }
    // nudge down so that 0.2 * 100 is 20, not 21
    Ok(((rate * population as f64 - 1e-9).ceil() as usize).clamp(1, population))
}

pub fn uniform_solution(domains: &[usize], rng: &mut impl Rng) -> Solution {
    Solution::new(domains.iter().map(|&d| rng.gen_range(0..d) as Code).collect())
}

/// Draws `size` uniform solutions and repairs each with a seed drawn from `rng`.
pub fn initialize_population(
    space: &SearchSpace,
    size: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Solution>, RepairError> {
    let raw: Vec<Solution> = (0..size).map(|_| uniform_solution(space.domain_sizes(), rng)).collect();
    raw.into_iter().map(|s| space.repair(s, rng.next_u64())).collect()
}
