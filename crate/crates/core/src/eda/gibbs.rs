//! Random-scan Gibbs sampling from a bivariate model.

use rand::Rng;

use super::model::ProbabilityModel;
use crate::model::{Code, Solution};

/// Draws a code from a categorical distribution.
pub fn sample_categorical(p: &[f64], rng: &mut impl Rng) -> Code {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (code, &q) in p.iter().enumerate() {
        if q <= 0.0 {
            continue;
        }
        acc += q;
        last = code;
        if u < acc {
            return code as Code;
        }
    }
    last as Code
}

/// Uniform start, then `multiplier * n` single-site updates on uniformly chosen variables.
pub fn gibbs_sample(model: &ProbabilityModel, multiplier: usize, rng: &mut impl Rng) -> Solution {
    let n = model.n_variables();
    let mut state: Vec<Code> = model.domain_sizes.iter().map(|&d| rng.gen_range(0..d) as Code).collect();
    for _ in 0..multiplier * n {
        let i = rng.gen_range(0..n);
        state[i] = sample_categorical(model.distribution(i, &state), rng);
    }
    Solution::new(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_marginal_is_always_hit() {
        let mut m = ProbabilityModel::uniform(&[3]);
        m.marginals[0] = vec![0.0, 0.0, 1.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(gibbs_sample(&m, 1000, &mut rng).values(), &[2]);
        }
    }

    #[test]
    fn deterministic_mutual_conditionals_are_absorbing() {
        let mut m = ProbabilityModel::uniform(&[2, 2]);
        let copy = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        m.neighbors = vec![Some(1), Some(0)];
        m.conditionals = vec![Some(copy.clone()), Some(copy)];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut seen = [0usize; 2];
        for _ in 0..400 {
            let s = gibbs_sample(&m, 1000, &mut rng);
            assert_eq!(s.get(0), s.get(1));
            seen[s.get(0) as usize] += 1;
        }
        assert!(seen[0] > 100 && seen[1] > 100);
    }

    #[test]
    fn categorical_draws_follow_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = [0.2, 0.0, 0.8];
        let mut counts = [0usize; 3];
        for _ in 0..20_000 {
            counts[sample_categorical(&p, &mut rng) as usize] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 20_000.0 - 0.2).abs() < 0.015);
    }
}
