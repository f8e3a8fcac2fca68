//! Small finite-domain constraint solver: bitmask domains, queue-driven
//! propagation to a fixpoint, and chronological backtracking.

mod constraint;
mod domain;
mod solver;

pub use constraint::{ConnectivitySpec, CpConstraint, SumMode};
pub use domain::{Domain, MAX_VALUE};
pub use solver::{
    Assignment, CpProblem, SearchStrategy, SolveOptions, SolveOutcome, SolveStatus, ValueOrder, VariableOrder,
};

/// Handle of a variable inside one [`CpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl CpProblem {
    /// Domains after root propagation, or `None` if propagation wipes out.
    pub fn propagated_domains(&self) -> Option<Vec<Domain>> {
        let mut doms: Vec<Domain> = (0..self.n_variables()).map(|v| self.domain(VarId(v))).collect();
        self.propagate_all(&mut doms).then_some(doms)
    }
}
