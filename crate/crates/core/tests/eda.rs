use std::sync::atomic::{AtomicUsize, Ordering};

use confdesign::eda::{
    build_forest, chi_square, estimate_model, forest_model, gibbs_sample, initialize_population, run, threshold,
    AlgoConfig, Algorithm, DependencyStats, ProbabilityModel, RunOptions, SearchSpace,
};
use confdesign::error::{EvalError, RunError};
use confdesign::fitness::{Evaluator, SyntheticEvaluator, SyntheticKind};
use confdesign::model::{build_spec, is_feasible, CategoricalSpace, Problem, ProblemFile, RawSpec, Solution};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Classical contingency-table statistic on raw counts, skipping empty rows and columns.
fn pearson(pairs: &[(u8, u8)], di: usize, dj: usize) -> f64 {
    let n = pairs.len() as f64;
    let mut obs = vec![vec![0.0; dj]; di];
    for &(a, b) in pairs {
        obs[a as usize][b as usize] += 1.0;
    }
    let rows: Vec<f64> = obs.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..dj).map(|b| obs.iter().map(|r| r[b]).sum()).collect();
    let mut chi = 0.0;
    for a in 0..di {
        for b in 0..dj {
            let e = rows[a] * cols[b] / n;
            if e > 0.0 {
                chi += (obs[a][b] - e).powi(2) / e;
            }
        }
    }
    chi
}

fn sample_from(pairs: &[(u8, u8)]) -> Vec<Solution> {
    pairs.iter().map(|&(a, b)| Solution::new(vec![a, b])).collect()
}

#[test]
fn chi_square_matches_contingency_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let size = rng.gen_range(5..=50);
        let (di, dj) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let skew: f64 = rng.gen();
        let pairs: Vec<(u8, u8)> = (0..size)
            .map(|_| {
                let a = rng.gen_range(0..di) as u8;
                let b = if rng.gen_bool(skew) { (a as usize % dj) as u8 } else { rng.gen_range(0..dj) as u8 };
                (a, b)
            })
            .collect();
        let sols = sample_from(&pairs);
        let refs: Vec<&Solution> = sols.iter().collect();
        let got = chi_square(&refs, (0, di), (1, dj), 0.99, true);
        let want = pearson(&pairs, di, dj);
        assert!((got.chi2 - want).abs() < 1e-9, "{} vs {}", got.chi2, want);
        let back = chi_square(&refs, (1, dj), (0, di), 0.99, true);
        assert_eq!(got, back);
        if got.significant {
            assert!(got.chi2 >= threshold(got.dof, 0.99).unwrap());
        }
    }
}

fn random_sample(n_vars: usize, domains: &[usize], size: usize, rng: &mut ChaCha8Rng) -> Vec<Solution> {
    (0..size)
        .map(|_| {
            let mut v: Vec<u8> = (0..n_vars).map(|i| rng.gen_range(0..domains[i]) as u8).collect();
            // inject some structure so conditionals are non-trivial
            if rng.gen_bool(0.6) {
                v[1] = v[0] % domains[1] as u8;
            }
            Solution::new(v)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn model_tables_are_normalised(seed in any::<u64>(), size in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domains = [3, 2, 3, 2, 3];
        let sols = random_sample(5, &domains, size, &mut rng);
        let refs: Vec<&Solution> = sols.iter().collect();
        let mut stats = DependencyStats::new(5);
        stats.update(&refs, &domains, 0.99, true);
        let m = estimate_model(&refs, &domains, &stats);
        for i in 0..5 {
            prop_assert!((m.marginals[i].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            if let Some(rows) = &m.conditionals[i] {
                for row in rows {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
            for j in 0..5 {
                prop_assert_eq!(stats.chi2(i, j), stats.chi2(j, i));
                prop_assert_eq!(stats.is_significant(i, j), stats.is_significant(j, i));
                prop_assert!(stats.chi2(i, j) >= 0.0);
                if stats.is_significant(i, j) {
                    prop_assert!(stats.chi2(i, j) >= threshold(stats.dof(i, j), 0.99).unwrap());
                }
            }
            prop_assert_eq!(stats.chi2(i, i), 0.0);
            prop_assert!(!stats.is_significant(i, i));
            if let Some(j) = m.neighbors[i] {
                prop_assert!(stats.is_significant(i, j));
                for k in 0..5 {
                    if k != i && stats.is_significant(i, k) {
                        prop_assert!(stats.chi2(i, k) < stats.chi2(i, j) || (stats.chi2(i, k) == stats.chi2(i, j) && k >= j));
                    }
                }
            }
        }
    }
}

#[test]
fn identical_sample_is_degenerate() {
    let sols = vec![Solution::new(vec![2, 0, 1]); 10];
    let refs: Vec<&Solution> = sols.iter().collect();
    let domains = [3, 3, 3];
    let mut stats = DependencyStats::new(3);
    stats.update(&refs, &domains, 0.99, true);
    let m = estimate_model(&refs, &domains, &stats);
    assert_eq!(m.marginals[0], vec![0.0, 0.0, 1.0]);
    assert!(m.neighbors.iter().all(Option::is_none));
}

/// Exact distribution after `steps` random-scan updates from a uniform start,
/// by repeated application of the transition matrix over all states.
fn exact_chain(m: &ProbabilityModel, steps: usize) -> Vec<f64> {
    let d = &m.domain_sizes;
    let n = d.len();
    let total: usize = d.iter().product();
    let decode = |mut k: usize| {
        let mut s = vec![0u8; n];
        for i in 0..n {
            s[i] = (k % d[i]) as u8;
            k /= d[i];
        }
        s
    };
    let encode = |s: &[u8]| s.iter().enumerate().rev().fold(0, |acc, (i, &v)| acc * d[i] + v as usize);
    let cond = |i: usize, s: &[u8]| -> Vec<f64> {
        match m.neighbors[i] {
            Some(j) => m.conditionals[i].as_ref().unwrap()[s[j] as usize].clone(),
            None => m.marginals[i].clone(),
        }
    };
    let mut t = vec![vec![0.0; total]; total];
    for (k, row) in t.iter_mut().enumerate() {
        let s = decode(k);
        for i in 0..n {
            let p = cond(i, &s);
            for (v, &pv) in p.iter().enumerate() {
                let mut s2 = s.clone();
                s2[i] = v as u8;
                row[encode(&s2)] += pv / n as f64;
            }
        }
    }
    let mut dist = vec![1.0 / total as f64; total];
    for _ in 0..steps {
        let mut next = vec![0.0; total];
        for (k, &pk) in dist.iter().enumerate() {
            for (l, &tkl) in t[k].iter().enumerate() {
                next[l] += pk * tkl;
            }
        }
        dist = next;
    }
    dist
}

fn three_variable_model() -> ProbabilityModel {
    let mut m = ProbabilityModel::uniform(&[3, 3, 3]);
    m.marginals = vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.2, 0.6], vec![0.1, 0.6, 0.3]];
    m.neighbors = vec![None, Some(0), Some(1)];
    m.conditionals = vec![
        None,
        Some(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.8, 0.1], vec![0.2, 0.2, 0.6]]),
        Some(vec![vec![0.6, 0.3, 0.1], vec![0.3, 0.4, 0.3], vec![0.05, 0.15, 0.8]]),
    ];
    m
}

#[test]
fn gibbs_matches_enumerated_distribution() {
    let m = three_variable_model();
    let exact = exact_chain(&m, 3 * 1000);
    assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut counts = [0usize; 27];
    let draws = 10_000;
    for _ in 0..draws {
        let s = gibbs_sample(&m, 1000, &mut rng);
        counts[s.get(0) as usize + 3 * s.get(1) as usize + 9 * s.get(2) as usize] += 1;
    }
    let tv: f64 = counts.iter().zip(&exact).map(|(&c, &p)| (c as f64 / draws as f64 - p).abs()).sum::<f64>() / 2.0;
    assert!(tv <= 0.05, "total variation {tv}");
}

#[test]
fn marginal_only_gibbs_is_product_of_marginals() {
    let mut m = ProbabilityModel::uniform(&[2, 3, 2]);
    m.marginals = vec![vec![0.8, 0.2], vec![0.1, 0.3, 0.6], vec![0.35, 0.65]];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 10_000;
    let mut joint = [0usize; 12];
    for _ in 0..draws {
        let s = gibbs_sample(&m, 1000, &mut rng);
        joint[s.get(0) as usize + 2 * s.get(1) as usize + 6 * s.get(2) as usize] += 1;
    }
    // Pearson goodness of fit against the product, 11 dof at the 99.9% level
    let mut stat = 0.0;
    for (k, &c) in joint.iter().enumerate() {
        let e = draws as f64 * m.marginals[0][k % 2] * m.marginals[1][(k / 2) % 3] * m.marginals[2][k / 6];
        stat += (c as f64 - e).powi(2) / e;
    }
    assert!(stat < threshold(11, 0.999).unwrap(), "goodness-of-fit statistic {stat}");
}

#[test]
fn ancestral_sampling_without_dependencies_uses_marginals() {
    let sols: Vec<Solution> = (0..40u8).map(|k| Solution::new(vec![k % 2, (k / 2) % 3])).collect();
    let refs: Vec<&Solution> = sols.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let forest = build_forest(&DependencyStats::new(2), &mut rng);
    let m = forest_model(&refs, &[2, 3], &forest);
    assert!(m.neighbors.iter().all(Option::is_none));
    assert_eq!(m.marginals[0], vec![0.5, 0.5]);
}

fn one_max_space(n: usize, domain: usize) -> (SearchSpace, SyntheticEvaluator) {
    let space = SearchSpace::new(Problem::Categorical(CategoricalSpace::new(vec![domain; n]).unwrap()));
    (space, SyntheticEvaluator::new(SyntheticKind::OneMax, n))
}

fn quick(algorithm: Algorithm, iters: usize, seed: u64) -> AlgoConfig {
    let mut cfg = AlgoConfig::new(algorithm);
    cfg.iteration_budget = iters;
    cfg.seed = seed;
    cfg.gibbs_sweep_multiplier = 50;
    cfg
}

#[test]
fn best_so_far_never_increases() {
    let (space, ev) = one_max_space(29, 3);
    for algorithm in Algorithm::ALL {
        for elitism in [true, false] {
            let mut cfg = quick(algorithm, 12, 3);
            cfg.elitism = elitism;
            let h = run(&space, &cfg, &ev, &RunOptions::default()).unwrap();
            assert_eq!(h.records.len(), 13);
            for (k, w) in h.records.windows(2).enumerate() {
                assert_eq!(w[0].iteration, k);
                assert!(w[1].best_fitness <= w[0].best_fitness, "{algorithm} elitism={elitism}");
                assert!(w[1].evals >= w[0].evals);
            }
            assert!(h.records[12].best_fitness < h.records[0].best_fitness);
            assert_eq!(ev.score(h.best.as_ref().unwrap().values()), h.best_fitness);
        }
    }
}

#[test]
fn zero_budget_keeps_only_the_initial_population() {
    let (space, ev) = one_max_space(10, 2);
    let h = run(&space, &quick(Algorithm::BmdaGs, 0, 1), &ev, &RunOptions::default()).unwrap();
    assert_eq!(h.records.len(), 1);
    assert_eq!(h.records[0].iteration, 0);
    assert_eq!(h.records[0].evals, h.total_evals());
    assert!(h.models.is_empty());
}

#[test]
fn stagnation_and_target_stop_early() {
    let (space, ev) = one_max_space(10, 2);
    let mut cfg = quick(Algorithm::BmdaGs, 200, 4);
    cfg.target_fitness = Some(-10.0);
    let h = run(&space, &cfg, &ev, &RunOptions::default()).unwrap();
    assert_eq!(h.best_fitness, -10.0);
    assert!(h.iterations() < 200);
    assert!(h.records[..h.records.len() - 1].iter().all(|r| r.best_fitness > -10.0));

    let mut cfg = quick(Algorithm::Ga, 500, 4);
    cfg.stagnation_window = Some(3);
    let h = run(&space, &cfg, &ev, &RunOptions::default()).unwrap();
    assert!(h.iterations() < 500);
    let tail = &h.records[h.records.len() - 4..];
    assert!(tail.iter().all(|r| r.best_fitness == tail[0].best_fitness));
}

#[test]
fn runs_are_reproducible_and_parallel_safe() {
    let space = SearchSpace::new(Problem::Categorical(CategoricalSpace::binary(20)));
    let ev = SyntheticEvaluator::new(SyntheticKind::TrapPairs, 20);
    for algorithm in Algorithm::ALL {
        let cfg = quick(algorithm, 8, 21);
        let strip = |mut h: confdesign::harness::RunHistory| {
            h.records.iter_mut().for_each(|r| r.wall_ms = 0.0);
            h
        };
        let a = strip(run(&space, &cfg, &ev, &RunOptions::default()).unwrap());
        let b = strip(run(&space, &cfg, &ev, &RunOptions::default()).unwrap());
        let c = strip(run(&space, &cfg, &ev, &RunOptions { jobs: 4, spec_hash: None }).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}

struct FailsOnCall {
    calls: AtomicUsize,
    at: usize,
}

impl Evaluator for FailsOnCall {
    fn name(&self) -> &str {
        "fails"
    }

    fn evaluate(&self, s: &Solution) -> Result<f64, EvalError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) == self.at {
            return Err(EvalError::Other("simulated failure".into()));
        }
        Ok(s.values().iter().map(|&v| v as f64).sum())
    }
}

#[test]
fn evaluator_failure_returns_partial_history() {
    let space = SearchSpace::new(Problem::Categorical(CategoricalSpace::binary(30)));
    let ev = FailsOnCall { calls: AtomicUsize::new(0), at: 250 };
    let mut cfg = quick(Algorithm::BmdaGs, 10, 0);
    cfg.cache_fitness = false;
    let err = run(&space, &cfg, &ev, &RunOptions::default()).unwrap_err();
    assert!(matches!(err.error, RunError::Eval(EvalError::Other(_))));
    // 100 evaluations per generation: call 250 belongs to generation 2
    assert_eq!(err.partial.records.len(), 2);
    assert_eq!(err.partial.models.len(), 2);
}

#[test]
fn invalid_configuration_is_rejected() {
    let (space, ev) = one_max_space(4, 2);
    let mut cfg = quick(Algorithm::BmdaGs, 1, 0);
    cfg.population_size = 1;
    let err = run(&space, &cfg, &ev, &RunOptions::default()).unwrap_err();
    assert!(matches!(err.error, RunError::Config(_)));
    assert!(err.partial.records.is_empty());
}

#[test]
fn initial_population_is_repaired_and_deterministic() {
    let pf = ProblemFile::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../problems/suspension.json")).unwrap();
    let space = SearchSpace::new(pf.problem.clone());
    let pop = initialize_population(&space, 100, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    assert_eq!(pop.len(), 100);
    for s in &pop {
        assert!(pf.problem.is_feasible(s));
    }
    let a = initialize_population(&space, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = initialize_population(&space, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_feasible_point_gives_identical_individuals() {
    let spec = build_spec(&RawSpec {
        n_joints: 2,
        joint_types: 2,
        component_types: 2,
        envos: Default::default(),
        type_rules: vec![],
        degree_rule: Default::default(),
    })
    .unwrap();
    let space = SearchSpace::new(Problem::Assembly(spec.clone()));
    let pop = initialize_population(&space, 30, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    for s in &pop {
        assert_eq!(s, &spec.zero_solution());
        assert_eq!(is_feasible(&spec, s), vec![]);
    }
}
