//! Browser bindings for the demo page. Every export returns a JSON string.

use confdesign::eda::{
    gibbs_sample, run, uniform_solution, AlgoConfig, Algorithm, ProbabilityModel, RunOptions, SearchSpace,
};
use confdesign::fitness::{SyntheticEvaluator, SyntheticKind};
use confdesign::harness::solution_json;
use confdesign::model::{is_feasible, CategoricalSpace, Problem, ProblemFile};
use confdesign::repair::Repairer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const SUSPENSION: &str = include_str!("../../../problems/suspension.json");

fn error(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

/// Draws a uniformly random suspension assignment and repairs it.
#[wasm_bindgen]
pub fn repair_random(seed: u32) -> String {
    let pf = match ProblemFile::from_json(SUSPENSION) {
        Ok(pf) => pf,
        Err(e) => return error(e),
    };
    let Problem::Assembly(spec) = &pf.problem else { return error("suspension problem must be an assembly") };
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let raw = uniform_solution(spec.domain_sizes(), &mut rng);
    let out = match Repairer::new(spec).repair(&raw, seed as u64) {
        Ok(out) => out,
        Err(e) => return error(e),
    };
    let mut before = solution_json(&pf.problem, &raw, f64::NAN);
    before["violations"] = json!(is_feasible(spec, &raw));
    let mut after = solution_json(&pf.problem, &out.repaired, f64::NAN);
    after["violations"] = json!(is_feasible(spec, &out.repaired));
    json!({
        "before": before,
        "after": after,
        "stage": out.stage_used,
        "joints_retyped": out.joints_retyped,
        "cp_nodes": out.cp_nodes_explored,
    })
    .to_string()
}

/// Runs one algorithm on the 20-variable trap-pairs surrogate.
#[wasm_bindgen]
pub fn run_trap_pairs(algorithm: &str, population: u32, iterations: u32, gibbs_multiplier: u32, seed: u32) -> String {
    let algorithm: Algorithm = match algorithm.parse() {
        Ok(a) => a,
        Err(e) => return error(e),
    };
    let n = 20;
    let ev = SyntheticEvaluator::new(SyntheticKind::TrapPairs, n);
    let space = SearchSpace::new(Problem::Categorical(CategoricalSpace::binary(n)));
    let mut cfg = AlgoConfig::new(algorithm);
    cfg.population_size = population as usize;
    cfg.iteration_budget = iterations as usize;
    cfg.gibbs_sweep_multiplier = gibbs_multiplier as usize;
    cfg.seed = seed as u64;
    cfg.target_fitness = Some(ev.optimum());
    let h = match run(&space, &cfg, &ev, &RunOptions::default()) {
        Ok(h) => h,
        Err(e) => return error(e),
    };
    let curve: Vec<Value> = h
        .records
        .iter()
        .map(|r| json!({ "iteration": r.iteration, "best": r.best_fitness, "mean": r.mean_fitness, "evals": r.evals }))
        .collect();
    json!({
        "algorithm": algorithm.name(),
        "optimum": ev.optimum(),
        "curve": curve,
        "best": h.best.as_ref().map(|s| s.values().to_vec()),
        "best_fitness": h.best_fitness,
        "evals_to_optimum": h.evals_to_reach(ev.optimum()),
        "planted_pairs": ev.pairs(),
        "dependencies": h.ever_significant(),
    })
    .to_string()
}

/// Three binary variables in a chain, each conditioned on a neighbour.
fn chain_model() -> ProbabilityModel {
    let mut m = ProbabilityModel::uniform(&[2, 2, 2]);
    m.marginals = vec![vec![0.6, 0.4], vec![0.5, 0.5], vec![0.3, 0.7]];
    m.neighbors = vec![Some(1), Some(0), Some(1)];
    m.conditionals = vec![
        Some(vec![vec![0.9, 0.1], vec![0.2, 0.8]]),
        Some(vec![vec![0.8, 0.2], vec![0.3, 0.7]]),
        Some(vec![vec![0.25, 0.75], vec![0.6, 0.4]]),
    ];
    m
}

/// Law of the random-scan chain after `steps` updates from a uniform start.
fn exact_law(m: &ProbabilityModel, steps: usize) -> Vec<f64> {
    let n = m.n_variables();
    let total = 1usize << n;
    let mut t = vec![vec![0.0; total]; total];
    for (k, row) in t.iter_mut().enumerate() {
        for i in 0..n {
            let p = match m.neighbors[i] {
                Some(j) => &m.conditionals[i].as_ref().unwrap()[(k >> j) & 1],
                None => &m.marginals[i],
            };
            for (v, &pv) in p.iter().enumerate() {
                row[(k & !(1 << i)) | (v << i)] += pv / n as f64;
            }
        }
    }
    let mut law = vec![1.0 / total as f64; total];
    for _ in 0..steps {
        let mut next = vec![0.0; total];
        for (k, &pk) in law.iter().enumerate() {
            for (l, &tkl) in t[k].iter().enumerate() {
                next[l] += pk * tkl;
            }
        }
        law = next;
    }
    law
}

/// Compares Gibbs samples from a small model with the chain's exact law.
#[wasm_bindgen]
pub fn gibbs_vs_exact(multiplier: u32, draws: u32, seed: u32) -> String {
    let m = chain_model();
    let exact = exact_law(&m, m.n_variables() * multiplier as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let mut counts = vec![0u32; exact.len()];
    for _ in 0..draws {
        let s = gibbs_sample(&m, multiplier as usize, &mut rng);
        let k = s.values().iter().enumerate().fold(0, |acc, (i, &v)| acc | (v as usize) << i);
        counts[k] += 1;
    }
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / draws.max(1) as f64).collect();
    let tv = empirical.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    let states: Vec<String> = (0..exact.len()).map(|k| format!("{}{}{}", k & 1, (k >> 1) & 1, (k >> 2) & 1)).collect();
    json!({ "states": states, "exact": exact, "empirical": empirical, "total_variation": tv }).to_string()
}
