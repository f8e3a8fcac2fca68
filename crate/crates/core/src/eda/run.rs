use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bmda::{ancestral_sample, build_forest, forest_model};
use super::chi2::DependencyStats;
use super::config::{AlgoConfig, Algorithm};
use super::evaluate::BatchEvaluator;
use super::ga::breed;
use super::gibbs::gibbs_sample;
use super::model::estimate_model;
use super::population::{initialize_population, Population};
use super::SearchSpace;
use crate::error::RunError;
use crate::fitness::Evaluator;
use crate::harness::{IterationRecord, RunHistory};
use crate::model::Solution;

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Parallel fitness evaluations.
    pub jobs: usize,
    pub spec_hash: Option<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { jobs: 1, spec_hash: None }
    }
}

/// A run aborted by an error, with everything recorded up to that point.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: RunError,
    pub partial: Box<RunHistory>,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "run aborted after {} iterations: {}", self.partial.iterations(), self.error)
    }
}

impl std::error::Error for RunFailure {}

pub fn run(
    space: &SearchSpace,
    cfg: &AlgoConfig,
    evaluator: &dyn Evaluator,
    opts: &RunOptions,
) -> Result<RunHistory, RunFailure> {
    let mut history = RunHistory::new(cfg.clone(), opts.spec_hash.clone());
    match drive(space, cfg, evaluator, opts, &mut history) {
        Ok(()) => Ok(history),
        Err(error) => Err(RunFailure { error, partial: Box::new(history) }),
    }
}

fn absorb(history: &mut RunHistory, pop: &Population) -> bool {
    let mut improved = false;
    for i in pop.ranking().into_iter().take(1) {
        if history.best.is_none() || pop.fitnesses[i] < history.best_fitness {
            history.best = Some(pop.solutions[i].clone());
            history.best_fitness = pop.fitnesses[i];
            improved = true;
        }
    }
    improved
}

fn drive(
    space: &SearchSpace,
    cfg: &AlgoConfig,
    evaluator: &dyn Evaluator,
    opts: &RunOptions,
    history: &mut RunHistory,
) -> Result<(), RunError> {
    cfg.validate()?;
    let start = Stopwatch::start();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut batch = BatchEvaluator::new(evaluator, cfg.cache_fitness, opts.jobs);
    let domains = space.domain_sizes().to_vec();
    let mut stats = DependencyStats::new(domains.len());
    let size = cfg.population_size;

    let initial = initialize_population(space, size, &mut rng)?;
    let fitnesses = batch.evaluate(&initial)?;
    let mut pop = Population { solutions: initial, fitnesses, generation: 0 };
    absorb(history, &pop);
    let record = |history: &mut RunHistory, pop: &Population, evals: u64| {
        history.records.push(IterationRecord {
            iteration: pop.generation,
            best_fitness: history.best_fitness,
            mean_fitness: pop.mean_fitness(),
            evals,
            wall_ms: start.elapsed_ms(),
        });
    };
    record(history, &pop, batch.evals());

    let mut stale = 0;
    for generation in 1..=cfg.iteration_budget {
        if cfg.target_fitness.is_some_and(|t| history.best_fitness <= t) {
            break;
        }
        if cfg.stagnation_window.is_some_and(|w| stale >= w) {
            break;
        }
        let fresh = if cfg.elitism { size - 1 } else { size };
        let raw: Vec<Solution> = match cfg.algorithm {
            Algorithm::BmdaGs => {
                let selected = pop.select_truncation(cfg.truncation_rate)?;
                stats.update(&selected, &domains, cfg.confidence_level, true);
                let model = estimate_model(&selected, &domains, &stats);
                let out = (0..fresh).map(|_| gibbs_sample(&model, cfg.gibbs_sweep_multiplier, &mut rng)).collect();
                history.models.push(model);
                history.significant.push(stats.significant_pairs());
                out
            }
            Algorithm::BmdaOriginal => {
                let selected = pop.select_truncation(cfg.truncation_rate)?;
                stats.update(&selected, &domains, cfg.confidence_level, false);
                let forest = build_forest(&stats, &mut rng);
                let model = forest_model(&selected, &domains, &forest);
                let out = (0..fresh).map(|_| ancestral_sample(&model, &forest, &mut rng)).collect();
                history.models.push(model);
                history.significant.push(stats.significant_pairs());
                out
            }
            Algorithm::Ga => breed(&pop, &domains, cfg, fresh, &mut rng),
        };
        let mut next = Vec::with_capacity(size);
        if cfg.elitism {
            next.push(history.best.clone().expect("initial population evaluated"));
        }
        for s in raw {
            next.push(space.repair(s, rng.next_u64())?);
        }
        let fitnesses = batch.evaluate(&next)?;
        pop = Population { solutions: next, fitnesses, generation };
        if absorb(history, &pop) {
            stale = 0;
        } else {
            stale += 1;
        }
        record(history, &pop, batch.evals());
    }
    if cfg.algorithm != Algorithm::Ga {
        history.dependencies = Some(stats);
    }
    Ok(())
}

/// Wall clock for the history; reads zero where the platform has no clock.
struct Stopwatch {
    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self {
            #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.start.elapsed().as_secs_f64() * 1e3;
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        0.0
    }
}
