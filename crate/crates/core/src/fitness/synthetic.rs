//! Synthetic fitness surrogates. All are minimised.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Evaluator;
use crate::error::EvalError;
use crate::model::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    OneMax,
    TrapPairs,
    PlantedPairs { seed: u64 },
}

/// Score of the second-best pair state. Close to the optimum so that the
/// single-gene signal towards `1` is weak.
pub const TRAP_SECOND: f64 = -1.8;

/// Score of one gene pair: `(1,1)` best, both non-one second, mixed worst.
pub fn trap_pair_score(a: u8, b: u8) -> f64 {
    match (a == 1, b == 1) {
        (true, true) => -2.0,
        (false, false) => TRAP_SECOND,
        _ => 0.0,
    }
}

/// Hidden pairing of `n` variables drawn from `seed`. An odd variable out is left unpaired.
pub fn planted_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.chunks_exact(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect()
}

/// Adjacent pairing `(0,1), (2,3), ...` used by the trap-pairs function.
pub fn adjacent_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect()
}

#[derive(Debug, Clone)]
pub struct SyntheticEvaluator {
    kind: SyntheticKind,
    pairs: Vec<(usize, usize)>,
    n: usize,
}

impl SyntheticEvaluator {
    pub fn new(kind: SyntheticKind, n_variables: usize) -> Self {
        let pairs = match kind {
            SyntheticKind::OneMax => Vec::new(),
            SyntheticKind::TrapPairs => adjacent_pairs(n_variables),
            SyntheticKind::PlantedPairs { seed } => planted_pairs(n_variables, seed),
        };
        Self { kind, pairs, n: n_variables }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Known global minimum.
    pub fn optimum(&self) -> f64 {
        match self.kind {
            SyntheticKind::OneMax => -(self.n as f64),
            _ => -2.0 * self.pairs.len() as f64,
        }
    }

    pub fn score(&self, x: &[u8]) -> f64 {
        match self.kind {
            SyntheticKind::OneMax => -(x.iter().filter(|&&v| v == 1).count() as f64),
            _ => self.pairs.iter().map(|&(i, j)| trap_pair_score(x[i], x[j])).sum(),
        }
    }
}

impl Evaluator for SyntheticEvaluator {
    fn name(&self) -> &str {
        match self.kind {
            SyntheticKind::OneMax => "one_max",
            SyntheticKind::TrapPairs => "trap_pairs",
            SyntheticKind::PlantedPairs { .. } => "planted_pairs",
        }
    }

    fn evaluate(&self, s: &Solution) -> Result<f64, EvalError> {
        if s.len() != self.n {
            return Err(EvalError::Other(format!("expected {} genes, got {}", self.n, s.len())));
        }
        Ok(self.score(s.values()))
    }
}
