//! Dependency-forest construction and ancestral sampling for the original BMDA.

use rand::Rng;

use super::chi2::DependencyStats;
use super::gibbs::sample_categorical;
use super::model::{conditional_table, marginal, ProbabilityModel};
use crate::model::{Code, Solution};

/// A dependency forest: `order` lists every variable with parents before children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    pub order: Vec<usize>,
    pub parent: Vec<Option<usize>>,
}

impl Forest {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.order.iter().filter_map(|&v| self.parent[v].map(|p| (p, v))).collect()
    }
}

/// Grows trees from random roots, each time attaching the outside variable with
/// the largest significant χ² to a variable already placed.
pub fn build_forest(stats: &DependencyStats, rng: &mut impl Rng) -> Forest {
    let n = stats.n;
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    while order.len() < n {
        let remaining: Vec<usize> = (0..n).filter(|&v| !placed[v]).collect();
        let root = remaining[rng.gen_range(0..remaining.len())];
        placed[root] = true;
        order.push(root);
        loop {
            let mut best: Option<(usize, usize, f64)> = None;
            for &u in &order {
                for v in 0..n {
                    if placed[v] || !stats.is_significant(u, v) {
                        continue;
                    }
                    let c = stats.chi2(u, v);
                    if best.is_none_or(|(_, _, b)| c > b) {
                        best = Some((u, v, c));
                    }
                }
            }
            let Some((u, v, _)) = best else { break };
            placed[v] = true;
            parent[v] = Some(u);
            order.push(v);
        }
    }
    Forest { order, parent }
}

/// Marginals for every variable and `p(child | parent)` tables along forest edges.
pub fn forest_model(sample: &[&Solution], domains: &[usize], forest: &Forest) -> ProbabilityModel {
    let n = domains.len();
    let marginals: Vec<Vec<f64>> = (0..n).map(|i| marginal(sample, i, domains[i])).collect();
    let conditionals = (0..n)
        .map(|v| forest.parent[v].map(|p| conditional_table(sample, (v, domains[v]), (p, domains[p]), &marginals[v])))
        .collect();
    ProbabilityModel { domain_sizes: domains.to_vec(), marginals, neighbors: forest.parent.clone(), conditionals }
}

/// Roots from marginals, then children from their parent's sampled value.
pub fn ancestral_sample(model: &ProbabilityModel, forest: &Forest, rng: &mut impl Rng) -> Solution {
    let mut state: Vec<Code> = vec![0; model.n_variables()];
    for &v in &forest.order {
        state[v] = sample_categorical(model.distribution(v, &state), rng);
    }
    Solution::new(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stats_with(n: usize, pairs: &[(usize, usize, f64)]) -> DependencyStats {
        let mut s = DependencyStats::new(n);
        for &(i, j, c) in pairs {
            for (a, b) in [(i, j), (j, i)] {
                s.chi2[a * n + b] = c;
                s.significant[a * n + b] = true;
                s.dof[a * n + b] = 1;
            }
        }
        s
    }

    #[test]
    fn no_dependencies_gives_isolated_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = build_forest(&DependencyStats::new(5), &mut rng);
        assert!(f.parent.iter().all(Option::is_none));
        let mut sorted = f.order.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn single_pair_becomes_one_edge() {
        let stats = stats_with(10, &[(3, 7, 40.0)]);
        for seed in 0..20 {
            let f = build_forest(&stats, &mut ChaCha8Rng::seed_from_u64(seed));
            let e = f.edges();
            assert_eq!(e.len(), 1);
            assert!(e[0] == (3, 7) || e[0] == (7, 3));
            let (p, c) = e[0];
            let pos = |v| f.order.iter().position(|&x| x == v).unwrap();
            assert!(pos(p) < pos(c));
        }
    }

    #[test]
    fn forest_prefers_strongest_edges() {
        // triangle 0-1-2: the weakest edge 0-2 must be dropped
        let stats = stats_with(3, &[(0, 1, 50.0), (1, 2, 40.0), (0, 2, 10.0)]);
        for seed in 0..20 {
            let f = build_forest(&stats, &mut ChaCha8Rng::seed_from_u64(seed));
            let mut e: Vec<(usize, usize)> = f.edges().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
            e.sort();
            assert_eq!(e, vec![(0, 1), (1, 2)]);
        }
    }

    #[test]
    fn deterministic_chain_is_fixed_by_the_root() {
        let rows: Vec<Solution> = (0..10).map(|k| Solution::new(vec![(k % 2) as u8; 4])).collect();
        let refs: Vec<&Solution> = rows.iter().collect();
        let stats = stats_with(4, &[(0, 1, 10.0), (1, 2, 10.0), (2, 3, 10.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let f = build_forest(&stats, &mut rng);
            let m = forest_model(&refs, &[2; 4], &f);
            let s = ancestral_sample(&m, &f, &mut rng);
            assert!(s.values().iter().all(|&v| v == s.get(f.order[0])));
        }
    }
}
