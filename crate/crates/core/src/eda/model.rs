//! Bivariate probability model: marginals plus at most one conditioning partner per variable.

use serde::{Deserialize, Serialize};

use super::chi2::{value_counts, DependencyStats};
use crate::model::Solution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityModel {
    pub domain_sizes: Vec<usize>,
    pub marginals: Vec<Vec<f64>>,
    /// Most dependent significant partner of each variable.
    pub neighbors: Vec<Option<usize>>,
    /// `conditionals[i][v]` is `p(x_i | x_{N_i} = v)`.
    pub conditionals: Vec<Option<Vec<Vec<f64>>>>,
}

/// Marginal distribution of `var` in `sample`.
pub fn marginal(sample: &[&Solution], var: usize, domain: usize) -> Vec<f64> {
    let total = sample.len() as f64;
    value_counts(sample, var, domain).into_iter().map(|c| c as f64 / total).collect()
}

/// Rows `p(x_i | x_j = v)` for every `v`; rows without observations copy `fallback`.
pub fn conditional_table(
    sample: &[&Solution],
    (i, di): (usize, usize),
    (j, dj): (usize, usize),
    fallback: &[f64],
) -> Vec<Vec<f64>> {
    let mut counts = vec![vec![0usize; di]; dj];
    for s in sample {
        counts[s.get(j) as usize][s.get(i) as usize] += 1;
    }
    counts
        .into_iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            if total == 0 {
                fallback.to_vec()
            } else {
                row.into_iter().map(|c| c as f64 / total as f64).collect()
            }
        })
        .collect()
}

impl ProbabilityModel {
    /// Independent uniform model.
    pub fn uniform(domain_sizes: &[usize]) -> Self {
        Self {
            domain_sizes: domain_sizes.to_vec(),
            marginals: domain_sizes.iter().map(|&d| vec![1.0 / d as f64; d]).collect(),
            neighbors: vec![None; domain_sizes.len()],
            conditionals: vec![None; domain_sizes.len()],
        }
    }

    pub fn n_variables(&self) -> usize {
        self.domain_sizes.len()
    }

    /// Distribution of `x_i` given the full current state.
    pub fn distribution<'a>(&'a self, i: usize, state: &[u8]) -> &'a [f64] {
        match (self.neighbors[i], &self.conditionals[i]) {
            (Some(j), Some(rows)) => &rows[state[j] as usize],
            _ => &self.marginals[i],
        }
    }

    /// Exact probability of a complete state under the product of conditionals.
    pub fn product_probability(&self, state: &[u8]) -> f64 {
        (0..self.n_variables()).map(|i| self.distribution(i, state)[state[i] as usize]).product()
    }

    /// Most probable code and its probability per variable; ties go to the lowest code.
    pub fn argmax_marginals(&self) -> Vec<(usize, f64)> {
        self.marginals
            .iter()
            .map(|m| {
                let mut best = (0, m[0]);
                for (code, &p) in m.iter().enumerate().skip(1) {
                    if p > best.1 {
                        best = (code, p);
                    }
                }
                best
            })
            .collect()
    }
}

/// Builds the model from `sample` using the current significance matrix in `stats`.
pub fn estimate_model(sample: &[&Solution], domains: &[usize], stats: &DependencyStats) -> ProbabilityModel {
    let n = domains.len();
    let marginals: Vec<Vec<f64>> = (0..n).map(|i| marginal(sample, i, domains[i])).collect();
    let mut neighbors = vec![None; n];
    let mut conditionals = vec![None; n];
    for i in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if j == i || !stats.is_significant(i, j) {
                continue;
            }
            let c = stats.chi2(i, j);
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((j, c));
            }
        }
        if let Some((j, _)) = best {
            neighbors[i] = Some(j);
            conditionals[i] = Some(conditional_table(sample, (i, domains[i]), (j, domains[j]), &marginals[i]));
        }
    }
    ProbabilityModel { domain_sizes: domains.to_vec(), marginals, neighbors, conditionals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_equality_links_both_variables() {
        // x3 == x7; every other pair is independent over the 64 rows
        let mut s = Vec::new();
        for k in 0..64u32 {
            let bit = |b: u32| ((k >> b) & 1) as u8;
            let v = vec![
                bit(1),
                bit(2),
                bit(3),
                bit(0),
                bit(4),
                bit(5),
                bit(1) ^ bit(2),
                bit(0),
                bit(3) ^ bit(4),
                bit(5) ^ bit(1),
            ];
            s.push(Solution::new(v));
        }
        let refs: Vec<&Solution> = s.iter().collect();
        let domains = vec![2; 10];
        let mut stats = DependencyStats::new(10);
        stats.update(&refs, &domains, 0.99, true);
        let m = estimate_model(&refs, &domains, &stats);
        assert_eq!(m.neighbors[3], Some(7));
        assert_eq!(m.neighbors[7], Some(3));
        let rows = m.conditionals[3].as_ref().unwrap();
        assert_eq!(rows[0], vec![1.0, 0.0]);
        assert_eq!(rows[1], vec![0.0, 1.0]);
    }

    #[test]
    fn rows_sum_to_one_and_unobserved_rows_fall_back() {
        let s: Vec<Solution> =
            [[0u8, 0], [1, 1], [1, 1], [0, 0], [1, 0]].iter().map(|r| Solution::new(r.to_vec())).collect();
        let refs: Vec<&Solution> = s.iter().collect();
        let m0 = marginal(&refs, 0, 3);
        assert!((m0.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let rows = conditional_table(&refs, (0, 3), (1, 3), &m0);
        for row in &rows {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(rows[2], m0);
    }

    #[test]
    fn argmax_prefers_lowest_code_on_ties() {
        let m = ProbabilityModel::uniform(&[3]);
        assert_eq!(m.argmax_marginals(), vec![(0, 1.0 / 3.0)]);
    }
}
