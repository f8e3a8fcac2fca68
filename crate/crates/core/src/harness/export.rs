//! File exports of a run: history CSV, best solution, dependency data and
//! per-iteration probability summaries.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::history::RunHistory;
use crate::eda::ProbabilityModel;
use crate::model::{Problem, Solution};

pub const HISTORY_HEADER: &str = "iteration,best_fitness,mean_fitness,evals,wall_ms";

pub fn history_csv(history: &RunHistory) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in &history.records {
        writeln!(out, "{},{},{},{},{:.3}", r.iteration, r.best_fitness, r.mean_fitness, r.evals, r.wall_ms).unwrap();
    }
    out
}

/// JSON numbers cannot be infinite; those are written as strings.
fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

/// Best solution as JSON, decoded into joint types and active components for assemblies.
/// Joints are numbered from 1, as in problem files.
pub fn solution_json(problem: &Problem, s: &Solution, fitness: f64) -> Value {
    let mut v = json!({
        "fitness": number(fitness),
        "feasible": problem.is_feasible(s),
        "values": s.values(),
    });
    if let Some(spec) = problem.as_assembly() {
        let joints: Vec<u8> = s.values()[..spec.n_joints()].to_vec();
        let components: Vec<[usize; 3]> = spec
            .index()
            .components()
            .filter(|&(f, _, _)| s.get(f) != 0)
            .map(|(f, i, j)| [i + 1, j + 1, s.get(f) as usize])
            .collect();
        v["joints"] = json!(joints);
        v["components"] = json!(components);
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDependency {
    pub i: usize,
    pub j: usize,
    pub cumulative_chi2: f64,
    pub ever_significant: bool,
}

/// Every pair `i < j` with its cumulative χ²; empty when no model was estimated.
pub fn dependency_pairs(history: &RunHistory) -> Vec<PairDependency> {
    let Some(stats) = &history.dependencies else { return Vec::new() };
    let ever = history.ever_significant();
    let mut out = Vec::new();
    for i in 0..stats.n {
        for j in (i + 1)..stats.n {
            out.push(PairDependency {
                i,
                j,
                cumulative_chi2: stats.cumulative(i, j),
                ever_significant: ever.binary_search(&(i, j)).is_ok(),
            });
        }
    }
    out
}

pub fn deps_json(history: &RunHistory) -> Value {
    json!({
        "n_variables": history.dependencies.as_ref().map(|s| s.n).or(history.best.as_ref().map(Solution::len)).unwrap_or(0),
        "generations": history.models.len(),
        "pairs": dependency_pairs(history),
    })
}

/// Undirected graph of the pairs ever flagged significant, weighted by cumulative χ².
pub fn deps_dot(history: &RunHistory) -> String {
    let mut out = String::from("graph dependencies {\n");
    for p in dependency_pairs(history).into_iter().filter(|p| p.ever_significant) {
        writeln!(out, "  x{} -- x{} [weight={}];", p.i, p.j, p.cumulative_chi2).unwrap();
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeEntry {
    pub var: usize,
    #[serde(rename = "type")]
    pub code: usize,
    pub p: f64,
}

/// Most probable code of each variable and its marginal probability.
pub fn pmodel_entries(model: &ProbabilityModel) -> Vec<ModeEntry> {
    model.argmax_marginals().into_iter().enumerate().map(|(var, (code, p))| ModeEntry { var, code, p }).collect()
}

pub fn pmodel_json(iteration: usize, model: &ProbabilityModel) -> Value {
    json!({ "iteration": iteration, "variables": pmodel_entries(model) })
}

/// Writes `history.csv`, `best_solution.json`, `deps.json`, `deps.dot` and one
/// `pmodel_iter<k>.json` per model snapshot, `k` counting from 1.
pub fn write_run_artifacts(dir: &Path, problem: &Problem, history: &RunHistory) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("history.csv"), history_csv(history))?;
    let best = match &history.best {
        Some(s) => solution_json(problem, s, history.best_fitness),
        None => Value::Null,
    };
    std::fs::write(dir.join("best_solution.json"), pretty(&best))?;
    std::fs::write(dir.join("deps.json"), pretty(&deps_json(history)))?;
    std::fs::write(dir.join("deps.dot"), deps_dot(history))?;
    for (k, model) in history.models.iter().enumerate() {
        std::fs::write(dir.join(format!("pmodel_iter{}.json", k + 1)), pretty(&pmodel_json(k + 1, model)))?;
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eda::{AlgoConfig, Algorithm, DependencyStats};
    use crate::harness::IterationRecord;

    fn history_with(pairs: &[(usize, usize)]) -> RunHistory {
        let mut h = RunHistory::new(AlgoConfig::new(Algorithm::BmdaGs), None);
        let mut stats = DependencyStats::new(4);
        for &(i, j) in pairs {
            stats.cumulative_chi2[i * 4 + j] = 12.5;
            stats.cumulative_chi2[j * 4 + i] = 12.5;
        }
        h.dependencies = Some(stats);
        h.significant = vec![pairs.to_vec(), pairs.to_vec()];
        h.models = vec![ProbabilityModel::uniform(&[2; 4]); 2];
        h
    }

    #[test]
    fn one_planted_pair_gives_one_edge() {
        let dot = deps_dot(&history_with(&[(1, 3)]));
        assert_eq!(dot.matches("--").count(), 1);
        assert!(dot.contains("x1 -- x3 [weight=12.5]"));
        assert!(!dot.contains("x3 -- x1"));
    }

    #[test]
    fn no_iterations_no_edges() {
        let h = RunHistory::new(AlgoConfig::new(Algorithm::BmdaGs), None);
        assert_eq!(deps_dot(&h), "graph dependencies {\n}\n");
        assert!(dependency_pairs(&h).is_empty());
    }

    #[test]
    fn pmodel_entries_report_mode() {
        let mut m = ProbabilityModel::uniform(&[3, 3]);
        m.marginals[0] = vec![0.0, 0.0, 1.0];
        let e = pmodel_entries(&m);
        assert_eq!(e[0], ModeEntry { var: 0, code: 2, p: 1.0 });
        assert_eq!(e[1].code, 0);
        assert!((e[1].p - 1.0 / 3.0).abs() < 1e-15);
        let v = serde_json::to_value(&e[0]).unwrap();
        assert_eq!(v, json!({"var": 0, "type": 2, "p": 1.0}));
    }

    #[test]
    fn csv_has_fixed_columns() {
        let mut h = history_with(&[]);
        h.records.push(IterationRecord {
            iteration: 0,
            best_fitness: -3.0,
            mean_fitness: 1.5,
            evals: 10,
            wall_ms: 0.25,
        });
        assert_eq!(history_csv(&h), "iteration,best_fitness,mean_fitness,evals,wall_ms\n0,-3,1.5,10,0.250\n");
    }

    #[test]
    fn writes_one_pmodel_file_per_iteration() {
        let dir = std::env::temp_dir().join(format!("confdesign-export-{}", std::process::id()));
        let h = history_with(&[(0, 1)]);
        let problem = Problem::Categorical(crate::model::CategoricalSpace::binary(4));
        write_run_artifacts(&dir, &problem, &h).unwrap();
        let n = std::fs::read_dir(&dir)
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("pmodel_iter"))
            .count();
        assert_eq!(n, 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
