//! Genetic-algorithm baseline: tournament selection, one-point crossover, per-gene mutation.

use rand::Rng;

use super::config::AlgoConfig;
use super::population::{truncation_size, Population};
use crate::model::{Code, Solution};

/// Produces `count` unrepaired offspring from an evaluated population.
pub fn breed<R: Rng>(
    pop: &Population,
    domains: &[usize],
    cfg: &AlgoConfig,
    count: usize,
    rng: &mut R,
) -> Vec<Solution> {
    let ranking = pop.ranking();
    let pool = truncation_size(pop.len(), cfg.ga_tournament_truncation).unwrap_or(pop.len());
    let tournament = |rng: &mut R| {
        let a = rng.gen_range(0..pool);
        let b = rng.gen_range(0..pool);
        &pop.solutions[ranking[a.min(b)]]
    };
    let n = domains.len();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p1 = tournament(rng);
        let p2 = tournament(rng);
        let (mut c1, mut c2) = (p1.values().to_vec(), p2.values().to_vec());
        if n >= 2 && rng.gen_bool(cfg.ga_crossover_rate) {
            let cut = rng.gen_range(1..n);
            c1[cut..].copy_from_slice(&p2.values()[cut..]);
            c2[cut..].copy_from_slice(&p1.values()[cut..]);
        }
        for child in [c1, c2] {
            if out.len() == count {
                break;
            }
            let mut child = child;
            for (g, &d) in child.iter_mut().zip(domains) {
                if rng.gen_bool(cfg.ga_mutation_rate) {
                    *g = rng.gen_range(0..d) as Code;
                }
            }
            out.push(Solution::new(child));
        }
    }
    out
}
