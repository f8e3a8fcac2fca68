use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::constraint::{Compiled, Connectivity, CpConstraint, Wipeout};
use super::domain::Domain;
use super::VarId;
use crate::error::CpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueOrder {
    AssignMinValue,
    AssignMaxValue,
    /// Uniform draw from the current domain using a generator seeded with the given value.
    AssignRandomValue {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableOrder {
    DeclarationOrder,
    /// Fixed random permutation of the variables drawn from the seed.
    RandomOrder {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchStrategy {
    pub value_order: ValueOrder,
    pub variable_order: VariableOrder,
}

impl SearchStrategy {
    pub fn min_value() -> Self {
        Self { value_order: ValueOrder::AssignMinValue, variable_order: VariableOrder::DeclarationOrder }
    }

    pub fn max_value() -> Self {
        Self { value_order: ValueOrder::AssignMaxValue, variable_order: VariableOrder::DeclarationOrder }
    }

    pub fn random_value(seed: u64) -> Self {
        Self { value_order: ValueOrder::AssignRandomValue { seed }, variable_order: VariableOrder::DeclarationOrder }
    }

    pub fn with_random_variable_order(mut self, seed: u64) -> Self {
        self.variable_order = VariableOrder::RandomOrder { seed };
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Maximum number of search nodes (value assignments) before giving up.
    pub node_budget: Option<u64>,
    /// Record one text line per search event.
    pub trace: bool,
}

/// Complete variable assignment returned by [`CpProblem::solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(Vec<u32>);

impl Assignment {
    pub fn value(&self, var: VarId) -> u32 {
        self.0[var.0]
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    Solved(Assignment),
    Unsat,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub nodes: u64,
    pub trace: Vec<String>,
}

impl SolveOutcome {
    pub fn assignment(&self) -> Option<&Assignment> {
        match &self.status {
            SolveStatus::Solved(a) => Some(a),
            _ => None,
        }
    }
}

/// A finite-domain constraint satisfaction problem.
#[derive(Debug, Clone, Default)]
pub struct CpProblem {
    initial: Vec<Domain>,
    domains: Vec<Domain>,
    constraints: Vec<Compiled>,
    watchers: Vec<Vec<usize>>,
}

impl CpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, domain: Domain) -> Result<VarId, CpError> {
        if domain.is_empty() {
            return Err(CpError::EmptyDomain);
        }
        let id = VarId(self.domains.len());
        self.initial.push(domain);
        self.domains.push(domain);
        self.watchers.push(Vec::new());
        Ok(id)
    }

    pub fn n_variables(&self) -> usize {
        self.domains.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Current domain of `var`.
    pub fn domain(&self, var: VarId) -> Domain {
        self.domains[var.0]
    }

    /// Domain given at creation time.
    pub fn initial_domain(&self, var: VarId) -> Domain {
        self.initial[var.0]
    }

    /// Intersects the domain of `var` with `with`. Fails if nothing remains.
    pub fn restrict(&mut self, var: VarId, with: Domain) -> Result<(), CpError> {
        self.check_var(var)?;
        let next = self.domains[var.0].intersect(with);
        if next.is_empty() {
            return Err(CpError::EmptyDomain);
        }
        self.domains[var.0] = next;
        Ok(())
    }

    fn check_var(&self, var: VarId) -> Result<(), CpError> {
        if var.0 < self.domains.len() {
            Ok(())
        } else {
            Err(CpError::UnknownVariable(var.0))
        }
    }

    pub fn add_constraint(&mut self, c: CpConstraint) -> Result<(), CpError> {
        let malformed = |msg: &str| Err(CpError::MalformedConstraint(msg.to_string()));
        let compiled = match c {
            CpConstraint::FixValue { var, value } => {
                self.check_var(var)?;
                if !self.domains[var.0].contains(value) {
                    return malformed("fixed value outside the variable's domain");
                }
                self.domains[var.0] = Domain::singleton(value);
                return Ok(());
            }
            CpConstraint::SumGreaterThan { scope, bound, mode, guards } => {
                if scope.is_empty() {
                    return malformed("SumGreaterThan needs a non-empty scope");
                }
                Compiled::Sum { scope, bound, mode, guards }
            }
            CpConstraint::ConditionalEquivalence { indicator, scope, one_way } => {
                if scope.is_empty() {
                    return malformed("ConditionalEquivalence needs a non-empty scope");
                }
                Compiled::CondEq { indicator, scope, one_way }
            }
            CpConstraint::CountEquivalence { indicator, indicator_value, scope, scope_value } => {
                if indicator_value > super::MAX_VALUE || scope_value > super::MAX_VALUE {
                    return malformed("CountEquivalence value out of range");
                }
                Compiled::CountEq { indicator, g: indicator_value, scope, h: scope_value }
            }
            CpConstraint::PathMatrixConnectivity(spec) => {
                if spec.joints.is_empty() || spec.joints.len() != spec.envo_of.len() {
                    return malformed("connectivity needs one envo entry per joint");
                }
                if spec.envo_of.iter().flatten().any(|&e| e >= spec.n_envos) {
                    return malformed("connectivity envo index out of range");
                }
                if spec.edges.iter().any(|&(i, j, _)| i == j || i >= spec.joints.len() || j >= spec.joints.len()) {
                    return malformed("connectivity edge endpoints out of range");
                }
                Compiled::Connectivity(Box::new(Connectivity::new(spec)))
            }
            CpConstraint::PathLink { target, via } => Compiled::PathLink { target, via },
        };
        let vars = compiled.vars();
        for &v in &vars {
            self.check_var(v)?;
        }
        let idx = self.constraints.len();
        for v in vars {
            if self.watchers[v.0].last() != Some(&idx) {
                self.watchers[v.0].push(idx);
            }
        }
        self.constraints.push(compiled);
        Ok(())
    }

    /// Naive check of a complete assignment against every constraint and domain.
    pub fn is_satisfied(&self, values: &[u32]) -> bool {
        values.len() == self.domains.len()
            && values.iter().zip(&self.domains).all(|(&v, d)| d.contains(v))
            && self.constraints.iter().all(|c| c.check(values))
    }

    pub fn solve(&self, strategy: SearchStrategy) -> SolveOutcome {
        self.solve_with(strategy, SolveOptions::default())
    }

    pub fn solve_with(&self, strategy: SearchStrategy, options: SolveOptions) -> SolveOutcome {
        let mut search = Search::new(self, strategy, options);
        let mut doms = self.domains.clone();
        let status = if self.propagate(&mut doms, (0..self.constraints.len()).collect()).is_err() {
            search.log(|| "root: wipeout".to_string());
            SolveStatus::Unsat
        } else {
            match search.first(doms) {
                Some(values) => SolveStatus::Solved(Assignment(values)),
                None if search.exhausted => SolveStatus::BudgetExhausted,
                None => SolveStatus::Unsat,
            }
        };
        SolveOutcome { status, nodes: search.nodes, trace: search.trace }
    }

    /// Number of satisfying assignments, counting stops at `limit`.
    pub fn count_solutions(&self, limit: u64) -> u64 {
        let mut search = Search::new(self, SearchStrategy::min_value(), SolveOptions::default());
        let mut doms = self.domains.clone();
        if self.propagate(&mut doms, (0..self.constraints.len()).collect()).is_err() {
            return 0;
        }
        let mut count = 0;
        search.all(doms, &mut |_| {
            count += 1;
            count < limit
        });
        count
    }

    pub(crate) fn propagate_all(&self, doms: &mut [Domain]) -> bool {
        self.propagate(doms, (0..self.constraints.len()).collect()).is_ok()
    }

    fn propagate(&self, doms: &mut [Domain], seed: Vec<usize>) -> Result<(), Wipeout> {
        let mut queued = vec![false; self.constraints.len()];
        let mut queue = VecDeque::with_capacity(seed.len());
        for c in seed {
            if !queued[c] {
                queued[c] = true;
                queue.push_back(c);
            }
        }
        let mut changed = Vec::new();
        while let Some(c) = queue.pop_front() {
            queued[c] = false;
            self.constraints[c].filter(doms, &mut changed)?;
            for v in changed.drain(..) {
                for &w in &self.watchers[v.0] {
                    if !queued[w] {
                        queued[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        Ok(())
    }
}

struct Search<'a> {
    problem: &'a CpProblem,
    value_order: ValueOrder,
    var_sequence: Vec<usize>,
    rng: ChaCha8Rng,
    budget: Option<u64>,
    nodes: u64,
    exhausted: bool,
    tracing: bool,
    trace: Vec<String>,
}

impl<'a> Search<'a> {
    fn new(problem: &'a CpProblem, strategy: SearchStrategy, options: SolveOptions) -> Self {
        let mut var_sequence: Vec<usize> = (0..problem.n_variables()).collect();
        if let VariableOrder::RandomOrder { seed } = strategy.variable_order {
            var_sequence.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let value_seed = match strategy.value_order {
            ValueOrder::AssignRandomValue { seed } => seed,
            _ => 0,
        };
        Self {
            problem,
            value_order: strategy.value_order,
            var_sequence,
            rng: ChaCha8Rng::seed_from_u64(value_seed),
            budget: options.node_budget,
            nodes: 0,
            exhausted: false,
            tracing: options.trace,
            trace: Vec::new(),
        }
    }

    fn log(&mut self, line: impl FnOnce() -> String) {
        if self.tracing {
            self.trace.push(line());
        }
    }

    fn pick(&self, doms: &[Domain]) -> Option<usize> {
        self.var_sequence.iter().copied().find(|&v| !doms[v].is_fixed())
    }

    fn ordered(&mut self, d: Domain) -> Vec<u32> {
        let mut values: Vec<u32> = d.values().collect();
        match self.value_order {
            ValueOrder::AssignMinValue => {}
            ValueOrder::AssignMaxValue => values.reverse(),
            ValueOrder::AssignRandomValue { .. } => values.shuffle(&mut self.rng),
        }
        values
    }

    fn leaf(doms: &[Domain]) -> Vec<u32> {
        doms.iter().map(|d| d.value().expect("all domains fixed")).collect()
    }

    fn first(&mut self, doms: Vec<Domain>) -> Option<Vec<u32>> {
        let mut found = None;
        self.all(doms, &mut |values| {
            found = Some(values.to_vec());
            false
        });
        found
    }

    /// Depth-first enumeration; `visit` returns false to stop.
    fn all(&mut self, doms: Vec<Domain>, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        self.descend(doms, 0, visit)
    }

    fn descend(&mut self, doms: Vec<Domain>, depth: usize, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        let Some(var) = self.pick(&doms) else {
            let values = Self::leaf(&doms);
            if self.problem.constraints.iter().all(|c| c.check(&values)) {
                self.log(|| format!("{:indent$}solution", "", indent = depth));
                return visit(&values);
            }
            self.log(|| format!("{:indent$}leaf rejected", "", indent = depth));
            return true;
        };
        for value in self.ordered(doms[var]) {
            if self.budget.is_some_and(|b| self.nodes >= b) {
                self.exhausted = true;
                return false;
            }
            self.nodes += 1;
            let mut child = doms.clone();
            child[var] = Domain::singleton(value);
            let ok = self.problem.propagate(&mut child, self.problem.watchers[var].clone()).is_ok();
            self.log(|| {
                let mut s = String::new();
                let _ = write!(s, "{:indent$}x{var} = {value}", "", indent = depth);
                if !ok {
                    s.push_str(" (wipeout)");
                }
                s
            });
            if ok && !self.descend(child, depth + 1, visit) {
                return false;
            }
        }
        true
    }
}
