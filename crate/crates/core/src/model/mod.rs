//! Problem definition: variables, domains, environment objects and the
//! declarative configuration constraints, plus the graph-search feasibility oracle.

mod feasibility;
mod file;
mod spec;

pub use feasibility::{connectivity_holds, is_feasible, Violation, ViolationKind};
pub use file::{CategoricalSpace, Problem, ProblemFile};
pub use spec::{
    active_component_count, active_joint_count, build_spec, Code, DegreeRule, EnvObject, ProblemSpec, RawSpec,
    Solution, TypeRule, VarKind, Variable, VariableIndex, MAX_TYPE_CODE,
};
