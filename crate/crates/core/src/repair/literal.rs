//! Literal path-matrix connectivity encoding, kept as a cross-check of the
//! global connectivity constraint. Cubic in the number of joints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cp::{ConnectivitySpec, CpConstraint, CpProblem, Domain, SearchStrategy, SolveStatus, SumMode, VarId};
use crate::model::{connectivity_holds, Code, ProblemSpec, Solution};

/// Largest joint count accepted by [`LiteralModel::new`].
pub const MAX_LITERAL_JOINTS: usize = 6;

/// Connectivity of one assignment expressed with `a[i][j][k]` path indicators.
#[derive(Debug, Clone)]
pub struct LiteralModel {
    pub problem: CpProblem,
    /// Joint variables, then component variables in flat order.
    pub design: Vec<VarId>,
    n: usize,
    /// `a` for `i < j`, indexed `[pair][k - 1]`.
    paths: Vec<Vec<VarId>>,
    one: VarId,
    zero: VarId,
}

impl LiteralModel {
    pub fn new(spec: &ProblemSpec) -> Self {
        let n = spec.n_joints();
        assert!(n <= MAX_LITERAL_JOINTS, "literal encoding limited to {MAX_LITERAL_JOINTS} joints");
        let index = spec.index();
        let mut p = CpProblem::new();
        let add = |p: &mut CpProblem, d: Domain| p.add_variable(d).expect("non-empty domain");
        let design: Vec<VarId> =
            spec.domain_sizes().iter().map(|&size| add(&mut p, Domain::range(0, size as u32 - 1))).collect();
        let one = add(&mut p, Domain::singleton(1));
        let zero = add(&mut p, Domain::singleton(0));
        let k_max = n.saturating_sub(1);
        let mut paths = Vec::new();
        for _ in 0..n * (n.saturating_sub(1)) / 2 {
            paths.push((0..k_max).map(|_| add(&mut p, Domain::range(0, 1))).collect());
        }
        let mut model = LiteralModel { problem: p, design, n, paths, one, zero };
        model.constrain(spec, index);
        model
    }

    fn pair(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// `a[i][j][k]`, with the diagonal held at 0.
    fn a(&self, i: usize, j: usize, k: usize) -> VarId {
        if i == j {
            self.zero
        } else {
            self.paths[self.pair(i, j)][k - 1]
        }
    }

    fn constrain(&mut self, spec: &ProblemSpec, index: &crate::model::VariableIndex) {
        let n = self.n;
        if n < 2 {
            return;
        }
        let mut constraints = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let direct = self.a(i, j, 1);
                match index.component(i, j) {
                    Some(f) => constraints.push(CpConstraint::ConditionalEquivalence {
                        indicator: direct,
                        scope: vec![self.design[f]],
                        one_way: false,
                    }),
                    None => constraints.push(CpConstraint::FixValue { var: direct, value: 1 }),
                }
                for k in 2..n {
                    let via =
                        (0..n).filter(|&l| l != i && l != j).map(|l| (self.a(i, l, 1), self.a(l, j, k - 1))).collect();
                    constraints.push(CpConstraint::PathLink { target: self.a(i, j, k), via });
                }
            }
        }
        let presence: Vec<VarId> = (0..n)
            .map(|i| {
                if spec.envo_of(i).is_some() {
                    return self.one;
                }
                let p = self.problem.add_variable(Domain::range(0, 1)).expect("non-empty domain");
                let mut scope = vec![self.design[i]];
                scope.extend(index.incident(i).iter().map(|&f| self.design[f]));
                constraints.push(CpConstraint::ConditionalEquivalence { indicator: p, scope, one_way: false });
                p
            })
            .collect();
        for i in 0..n {
            for j in (i + 1)..n {
                constraints.push(CpConstraint::SumGreaterThan {
                    scope: (1..n).map(|k| self.a(i, j, k)).collect(),
                    bound: 0,
                    mode: SumMode::CountNonZero,
                    guards: vec![presence[i], presence[j]],
                });
            }
        }
        for c in constraints {
            self.problem.add_constraint(c).expect("well-formed literal constraint");
        }
    }

    /// Whether the fixed design assignment `s` admits a consistent path matrix.
    pub fn connected(&self, s: &Solution) -> bool {
        let mut p = self.problem.clone();
        for (f, &code) in s.values().iter().enumerate() {
            if p.restrict(self.design[f], Domain::singleton(code as u32)).is_err() {
                return false;
            }
        }
        matches!(p.solve(SearchStrategy::min_value()).status, SolveStatus::Solved(_))
    }
}

/// Verdict of the global connectivity constraint on a fixed assignment.
pub fn global_connected(spec: &ProblemSpec, s: &Solution) -> bool {
    let mut p = CpProblem::new();
    let vars: Vec<VarId> = s
        .values()
        .iter()
        .map(|&code| p.add_variable(Domain::singleton(code as u32)).expect("non-empty domain"))
        .collect();
    let index = spec.index();
    let spec_c = ConnectivitySpec {
        joints: vars[..spec.n_joints()].to_vec(),
        envo_of: (0..spec.n_joints()).map(|i| spec.envo_of(i)).collect(),
        n_envos: spec.envos().len(),
        edges: index.components().map(|(f, i, j)| (i, j, vars[f])).collect(),
    };
    p.add_constraint(CpConstraint::PathMatrixConnectivity(spec_c)).expect("well-formed connectivity");
    matches!(p.solve(SearchStrategy::min_value()).status, SolveStatus::Solved(_))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub assignment: Solution,
    pub global: bool,
    pub literal: bool,
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingReport {
    pub trials: usize,
    pub connected: usize,
    pub disagreements: Vec<Disagreement>,
}

impl EncodingReport {
    pub fn agree(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compares the global constraint, the literal encoding, and graph search on
/// `trials` uniformly random assignments.
pub fn verify_encodings_agree(spec: &ProblemSpec, trials: usize, seed: u64) -> EncodingReport {
    let literal = LiteralModel::new(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EncodingReport { trials, connected: 0, disagreements: Vec::new() };
    for _ in 0..trials {
        let s = Solution::new(spec.domain_sizes().iter().map(|&d| rng.gen_range(0..d) as Code).collect());
        let verdicts = check_one(spec, &literal, &s);
        if verdicts.0 {
            report.connected += 1;
        }
        if !(verdicts.0 == verdicts.1 && verdicts.1 == verdicts.2) {
            report.disagreements.push(Disagreement {
                assignment: s,
                global: verdicts.0,
                literal: verdicts.1,
                oracle: verdicts.2,
            });
        }
    }
    report
}

/// `(global, literal, oracle)` connectivity verdicts for one assignment.
pub fn check_one(spec: &ProblemSpec, literal: &LiteralModel, s: &Solution) -> (bool, bool, bool) {
    (global_connected(spec, s), literal.connected(s), connectivity_holds(spec, s))
}
