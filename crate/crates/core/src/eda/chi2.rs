//! Pairwise chi-square dependency tests over a selected sample.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::model::Solution;

/// Critical values at the 99% level for 4, 3, 2 and 1 degrees of freedom.
pub const THRESHOLDS_99: [(i64, f64); 4] = [(4, 13.28), (3, 11.34), (2, 9.21), (1, 6.63)];

/// Critical chi-square value for `dof` degrees of freedom, or `None` when `dof <= 0`.
///
/// The tabulated 99% values are used where they exist; other levels and
/// larger `dof` fall back to the exact quantile.
pub fn threshold(dof: i64, confidence: f64) -> Option<f64> {
    if dof <= 0 {
        return None;
    }
    if confidence == 0.99 {
        if let Some(&(_, t)) = THRESHOLDS_99.iter().find(|&&(d, _)| d == dof) {
            return Some(t);
        }
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Some(dist.inverse_cdf(confidence))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub chi2: f64,
    pub dof: i64,
    pub significant: bool,
}

/// Per-variable value counts of a sample.
pub fn value_counts(sample: &[&Solution], var: usize, domain: usize) -> Vec<usize> {
    let mut counts = vec![0; domain];
    for s in sample {
        counts[s.get(var) as usize] += 1;
    }
    counts
}

/// Chi-square statistic between variables `i` and `j` of `sample`.
///
/// With `adaptive`, the degrees of freedom are reduced by the number of
/// never-observed values of each variable. The result does not depend on
/// argument order.
pub fn chi_square(
    sample: &[&Solution],
    a: (usize, usize),
    b: (usize, usize),
    confidence: f64,
    adaptive: bool,
) -> ChiSquare {
    let ((i, di), (j, dj)) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    let total = sample.len() as f64;
    let pi: Vec<f64> = value_counts(sample, i, di).into_iter().map(|c| c as f64 / total).collect();
    let pj: Vec<f64> = value_counts(sample, j, dj).into_iter().map(|c| c as f64 / total).collect();
    let mut joint = vec![0usize; di * dj];
    for s in sample {
        joint[s.get(i) as usize * dj + s.get(j) as usize] += 1;
    }
    let mut chi2 = 0.0;
    for a in 0..di {
        for b in 0..dj {
            let indep = pi[a] * pj[b];
            if indep == 0.0 {
                continue;
            }
            let pab = joint[a * dj + b] as f64 / total;
            let diff = total * pab - total * indep;
            chi2 += diff * diff / (total * indep);
        }
    }
    let (mi, mj) = if adaptive {
        (pi.iter().filter(|&&p| p == 0.0).count() as i64, pj.iter().filter(|&&p| p == 0.0).count() as i64)
    } else {
        (0, 0)
    };
    let dof = (di as i64 - 1) * (dj as i64 - 1) - mi - mj;
    let significant = threshold(dof, confidence).is_some_and(|t| chi2 >= t);
    ChiSquare { chi2, dof, significant }
}

/// Symmetric matrices of pairwise test results plus a running χ² total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyStats {
    pub n: usize,
    pub chi2: Vec<f64>,
    pub dof: Vec<i64>,
    pub significant: Vec<bool>,
    pub cumulative_chi2: Vec<f64>,
}

impl DependencyStats {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            chi2: vec![0.0; n * n],
            dof: vec![0; n * n],
            significant: vec![false; n * n],
            cumulative_chi2: vec![0.0; n * n],
        }
    }

    pub fn chi2(&self, i: usize, j: usize) -> f64 {
        self.chi2[i * self.n + j]
    }

    pub fn dof(&self, i: usize, j: usize) -> i64 {
        self.dof[i * self.n + j]
    }

    pub fn is_significant(&self, i: usize, j: usize) -> bool {
        self.significant[i * self.n + j]
    }

    pub fn cumulative(&self, i: usize, j: usize) -> f64 {
        self.cumulative_chi2[i * self.n + j]
    }

    /// Significant pairs `(i, j)` with `i < j`.
    pub fn significant_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.is_significant(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Recomputes every pair on `sample`, adding the new values to the running totals.
    pub fn update(&mut self, sample: &[&Solution], domains: &[usize], confidence: f64, adaptive: bool) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let r = chi_square(sample, (i, domains[i]), (j, domains[j]), confidence, adaptive);
                for (a, b) in [(i, j), (j, i)] {
                    self.chi2[a * n + b] = r.chi2;
                    self.dof[a * n + b] = r.dof;
                    self.significant[a * n + b] = r.significant;
                    self.cumulative_chi2[a * n + b] += r.chi2;
                }
            }
        }
    }
}
