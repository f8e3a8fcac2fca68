//! Repeated runs of several algorithms with aggregated best-fitness curves.

use std::fmt::Write as _;

use serde::Serialize;

use super::history::RunHistory;
use crate::eda::{run, AlgoConfig, Algorithm, RunFailure, RunOptions, SearchSpace};
use crate::error::{ConfigError, RunError};
use crate::fitness::Evaluator;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub algorithm: Algorithm,
    pub runs: usize,
    /// Mean of best-so-far fitness per iteration across runs.
    pub mean: Vec<f64>,
    /// Population standard deviation per iteration.
    pub std: Vec<f64>,
    pub total_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub curves: Vec<Curve>,
}

/// Population mean and standard deviation of `values`.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregates histories of one algorithm. Runs that stopped early keep their
/// final best value for the remaining iterations.
pub fn aggregate(algorithm: Algorithm, histories: &[RunHistory]) -> Curve {
    let len = histories.iter().map(|h| h.records.len()).max().unwrap_or(0);
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    for k in 0..len {
        let column: Vec<f64> =
            histories.iter().filter_map(|h| h.records.get(k).or(h.records.last()).map(|r| r.best_fitness)).collect();
        let (m, s) = mean_std(&column);
        mean.push(m);
        std.push(s);
    }
    Curve {
        algorithm,
        runs: histories.len(),
        mean,
        std,
        total_evals: histories.iter().map(RunHistory::total_evals).sum(),
    }
}

pub fn compare_csv(report: &CompareReport) -> String {
    let mut out = String::from("algorithm,iteration,mean_best_fitness,std_best_fitness\n");
    for c in &report.curves {
        for (k, (m, s)) in c.mean.iter().zip(&c.std).enumerate() {
            writeln!(out, "{},{},{},{}", c.algorithm, k, m, s).unwrap();
        }
    }
    out
}

/// Checks that every configuration shares population size and iteration budget.
pub fn check_shared_budget(configs: &[AlgoConfig]) -> Result<(), ConfigError> {
    if let Some(first) = configs.first() {
        for c in configs {
            if c.population_size != first.population_size || c.iteration_budget != first.iteration_budget {
                return Err(ConfigError::InconsistentComparison(format!(
                    "{} uses population {} and {} iterations, {} uses {} and {}",
                    first.algorithm,
                    first.population_size,
                    first.iteration_budget,
                    c.algorithm,
                    c.population_size,
                    c.iteration_budget
                )));
            }
        }
    }
    Ok(())
}

/// Runs each configuration `runs` times with seeds `config.seed + run`.
pub fn compare(
    space: &SearchSpace,
    evaluator: &dyn Evaluator,
    configs: &[AlgoConfig],
    runs: usize,
    opts: &RunOptions,
) -> Result<(CompareReport, Vec<Vec<RunHistory>>), RunFailure> {
    if let Err(e) = check_shared_budget(configs) {
        let partial = RunHistory::new(configs[0].clone(), opts.spec_hash.clone());
        return Err(RunFailure { error: RunError::Config(e), partial: Box::new(partial) });
    }
    let mut curves = Vec::new();
    let mut all = Vec::new();
    for base in configs {
        let mut histories = Vec::with_capacity(runs);
        for r in 0..runs {
            let mut cfg = base.clone();
            cfg.seed = base.seed.wrapping_add(r as u64);
            histories.push(run(space, &cfg, evaluator, opts)?);
        }
        curves.push(aggregate(base.algorithm, &histories));
        all.push(histories);
    }
    Ok((CompareReport { curves }, all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]), (5.0, 2.0));
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn budgets_must_match() {
        let a = AlgoConfig::new(Algorithm::BmdaGs);
        let mut b = AlgoConfig::new(Algorithm::Ga);
        assert!(check_shared_budget(&[a.clone(), b.clone()]).is_ok());
        b.population_size = 50;
        assert!(check_shared_budget(&[a, b]).is_err());
    }
}
