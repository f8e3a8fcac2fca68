//! Batched fitness evaluation with an optional value cache and worker pool.

use std::collections::HashMap;

use crate::error::EvalError;
use crate::fitness::Evaluator;
use crate::model::{Code, Solution};

pub struct BatchEvaluator<'a> {
    evaluator: &'a dyn Evaluator,
    cache: Option<HashMap<Vec<Code>, f64>>,
    evals: u64,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl<'a> BatchEvaluator<'a> {
    /// `jobs <= 1` evaluates on the calling thread.
    pub fn new(evaluator: &'a dyn Evaluator, cache: bool, jobs: usize) -> Self {
        #[cfg(not(feature = "parallel"))]
        let _ = jobs;
        Self {
            evaluator,
            cache: cache.then(HashMap::new),
            evals: 0,
            #[cfg(feature = "parallel")]
            pool: (jobs > 1).then(|| rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("worker pool")),
        }
    }

    /// Evaluator calls made so far.
    pub fn evals(&self) -> u64 {
        self.evals
    }

    fn call(&self, s: &Solution) -> Result<f64, EvalError> {
        let v = self.evaluator.evaluate(s)?;
        if v.is_nan() {
            return Err(EvalError::NotANumber(format!("{:?}", s.values())));
        }
        Ok(v)
    }

    fn dispatch(&self, todo: &[&Solution]) -> Vec<Result<f64, EvalError>> {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| todo.par_iter().map(|s| self.call(s)).collect());
        }
        todo.iter().map(|s| self.call(s)).collect()
    }

    /// Fitness of every solution, in order. The first failure by index is returned.
    pub fn evaluate(&mut self, solutions: &[Solution]) -> Result<Vec<f64>, EvalError> {
        let mut todo: Vec<&Solution> = Vec::new();
        match &self.cache {
            Some(cache) => {
                let mut queued = std::collections::HashSet::new();
                for s in solutions {
                    if !cache.contains_key(s.values()) && queued.insert(s.values()) {
                        todo.push(s);
                    }
                }
            }
            None => todo.extend(solutions.iter()),
        }
        let results = self.dispatch(&todo);
        self.evals += results.len() as u64;
        let values: Vec<f64> = results.into_iter().collect::<Result<_, _>>()?;
        match &mut self.cache {
            Some(cache) => {
                for (s, &v) in todo.iter().zip(&values) {
                    cache.insert(s.values().to_vec(), v);
                }
                Ok(solutions.iter().map(|s| cache[s.values()]).collect())
            }
            None => Ok(values),
        }
    }
}
